use std::fmt::Write as _;
use std::path::Path;

/// A CSV table preceded by `# key=value` lines describing the run.
pub struct Report {
    header: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Report {
            header: vec![("command".into(), command.into())],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.header.push((key.into(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    /// Trailing `# ...` line, e.g. a check summary.
    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            writeln!(s, "# {k}={v}").unwrap();
        }
        writeln!(s, "{}", self.columns.join(",")).unwrap();
        for r in &self.rows {
            writeln!(s, "{}", r.join(",")).unwrap();
        }
        for n in &self.notes {
            writeln!(s, "# {n}").unwrap();
        }
        s
    }

    /// Writes to `path`, or stdout when absent.
    pub fn emit(&self, path: Option<&Path>) -> std::io::Result<()> {
        match path {
            Some(p) => std::fs::write(p, self.render()),
            None => {
                print!("{}", self.render());
                Ok(())
            }
        }
    }
}
