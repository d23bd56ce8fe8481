//! Netpbm greymaps, ASCII (`P2`) and binary (`P5`).

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    Ascii,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major samples.
    pub pixels: Vec<u16>,
}

struct Cursor<'a> {
    data: &'a [u8],
    at: usize,
    line: usize,
}

impl Cursor<'_> {
    fn skip_space(&mut self) {
        while self.at < self.data.len() {
            match self.data[self.at] {
                b'#' => {
                    while self.at < self.data.len() && self.data[self.at] != b'\n' {
                        self.at += 1;
                    }
                }
                b'\n' => {
                    self.line += 1;
                    self.at += 1;
                }
                c if c.is_ascii_whitespace() => self.at += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&[u8]> {
        self.skip_space();
        let start = self.at;
        while self.at < self.data.len() && !self.data[self.at].is_ascii_whitespace() && self.data[self.at] != b'#' {
            self.at += 1;
        }
        (self.at > start).then(|| &self.data[start..self.at])
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, (usize, String)> {
        let line = self.line;
        let tok = self.token().ok_or((line, format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or((line, format!("bad {what}")))
    }
}

impl Pgm {
    pub fn parse(data: &[u8], path: &Path) -> Result<Pgm> {
        let perr = |(line, msg): (usize, String)| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut c = Cursor { data, at: 0, line: 1 };
        let format = match c.token() {
            Some(b"P2") => PgmFormat::Ascii,
            Some(b"P5") => PgmFormat::Binary,
            _ => return Err(perr((1, "expected magic P2 or P5".into()))),
        };
        let width = c.number("width").map_err(perr)?;
        let height = c.number("height").map_err(perr)?;
        let maxval = c.number("maxval").map_err(perr)?;
        if width == 0 || height == 0 {
            return Err(perr((c.line, "empty image".into())));
        }
        if maxval == 0 || maxval > 65535 {
            return Err(perr((c.line, format!("maxval {maxval} outside 1..=65535"))));
        }
        let count = width * height;
        let mut pixels = Vec::with_capacity(count);
        match format {
            PgmFormat::Ascii => {
                for _ in 0..count {
                    let v = c.number("sample").map_err(perr)?;
                    if v > maxval {
                        return Err(perr((c.line, format!("sample {v} exceeds maxval {maxval}"))));
                    }
                    pixels.push(v as u16);
                }
            }
            PgmFormat::Binary => {
                // exactly one whitespace byte separates the header from the raster
                if c.at >= data.len() || !data[c.at].is_ascii_whitespace() {
                    return Err(perr((c.line, "missing raster".into())));
                }
                let start = c.at + 1;
                let wide = maxval > 255;
                let need = count * if wide { 2 } else { 1 };
                let raster = data
                    .get(start..start + need)
                    .ok_or_else(|| perr((c.line, format!("raster needs {need} bytes"))))?;
                for k in 0..count {
                    let v = if wide {
                        u16::from_be_bytes([raster[2 * k], raster[2 * k + 1]])
                    } else {
                        u16::from(raster[k])
                    };
                    if usize::from(v) > maxval {
                        return Err(perr((c.line, format!("sample {v} exceeds maxval {maxval}"))));
                    }
                    pixels.push(v);
                }
            }
        }
        Ok(Pgm {
            width,
            height,
            maxval: maxval as u16,
            pixels,
        })
    }

    pub fn to_bytes(&self, format: PgmFormat) -> Vec<u8> {
        let magic = match format {
            PgmFormat::Ascii => "P2",
            PgmFormat::Binary => "P5",
        };
        let mut out = format!("{magic}\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        match format {
            PgmFormat::Ascii => {
                for row in self.pixels.chunks(self.width) {
                    let line: Vec<String> = row.iter().map(u16::to_string).collect();
                    out.extend_from_slice(line.join(" ").as_bytes());
                    out.push(b'\n');
                }
            }
            PgmFormat::Binary => {
                for &v in &self.pixels {
                    if self.maxval > 255 {
                        out.extend_from_slice(&v.to_be_bytes());
                    } else {
                        out.push(v as u8);
                    }
                }
            }
        }
        out
    }

    pub fn read(path: &Path) -> Result<Pgm> {
        Pgm::parse(&std::fs::read(path)?, path)
    }

    pub fn write(&self, path: &Path, format: PgmFormat) -> Result<()> {
        std::fs::write(path, self.to_bytes(format))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let img = Pgm {
            width: 3,
            height: 2,
            maxval: 255,
            pixels: vec![0, 17, 255, 4, 5, 6],
        };
        for fmt in [PgmFormat::Ascii, PgmFormat::Binary] {
            let bytes = img.to_bytes(fmt);
            let back = Pgm::parse(&bytes, Path::new("mem")).unwrap();
            assert_eq!(back, img);
            assert_eq!(back.to_bytes(fmt), bytes);
        }
        let wide = Pgm {
            maxval: 1000,
            pixels: vec![0, 999, 1000, 256, 1, 2],
            ..img
        };
        let bytes = wide.to_bytes(PgmFormat::Binary);
        assert_eq!(bytes.len(), "P5\n3 2\n1000\n".len() + 12);
        assert_eq!(Pgm::parse(&bytes, Path::new("mem")).unwrap(), wide);
    }

    #[test]
    fn comments_and_errors() {
        let text = b"P2\n# made by hand\n2 1 # width height\n9\n3 9\n";
        let p = Pgm::parse(text, Path::new("mem")).unwrap();
        assert_eq!(p.pixels, vec![3, 9]);
        let e = Pgm::parse(b"P2\n2 2\n9\n1 2 3\n", Path::new("x.pgm")).unwrap_err();
        assert!(e.to_string().contains("x.pgm:4"), "{e}");
        assert!(Pgm::parse(b"P2\n1 1\n9\n10\n", Path::new("mem")).is_err());
        assert!(Pgm::parse(b"P6\n1 1\n9\n1\n", Path::new("mem")).is_err());
    }
}
