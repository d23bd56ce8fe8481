use std::path::Path;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use wavecode::best_basis::{best_basis_select, cut_count, enumerate_cuts, Inner};
use wavecode::greedy::{greedy_offline, greedy_select_with_stats, universal_norms};
use wavecode::haar::{fptas_with, hybrid, rest_optimal, FptasConfig};
use wavecode::image2d::{greedy2d, image_errors, transform2d, Image};
use wavecode::oracle::{brute_force_cut, brute_force_restricted, brute_force_unrestricted, unrestricted_over};
use wavecode::quant::{bitcomplexity_select, multiplane_select, spectrum_select, FixedPoint, IndexCoding};
use wavecode::*;

const LEMMA3_C: f64 = 1.5;

fn signal(max_log: u32) -> impl Strategy<Value = Vec<f64>> {
    (1..=max_log).prop_flat_map(|l| prop::collection::vec(-100.0..100.0f64, 1usize << l))
}

fn filter() -> impl Strategy<Value = FilterBank> {
    prop::sample::select(FilterBank::all())
}

fn norm() -> impl Strategy<Value = LpNorm> {
    prop_oneof![
        Just(LpNorm::ONE),
        Just(LpNorm::TWO),
        Just(LpNorm::INF),
        (1.0..6.0f64).prop_map(|p| LpNorm::new(p).unwrap()),
    ]
}

fn small_norm() -> impl Strategy<Value = LpNorm> {
    prop::sample::select(vec![LpNorm::ONE, LpNorm::TWO, LpNorm::INF])
}

fn oracle_signal() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-20i32..=20).prop_map(|v| f64::from(v) / 4.0), 8)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cascade_round_trip_and_parseval(f in signal(10), fb in filter()) {
        let scale = f.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for s in [Scaling::Orthonormal, Scaling::AScaled, Scaling::BScaled] {
            let c = cascade_forward(&f, &fb, s).unwrap();
            let back = cascade_inverse(&c, &fb).unwrap();
            for (a, b) in back.iter().zip(&f) {
                prop_assert!((a - b).abs() <= 1e-9 * scale);
            }
        }
        let c = cascade_forward(&f, &fb, Scaling::Orthonormal).unwrap();
        let ef: f64 = f.iter().map(|v| v * v).sum();
        let ec: f64 = c.values.iter().map(|v| v * v).sum();
        prop_assert!((ef - ec).abs() <= 1e-9 * ef.max(1e-300));
    }

    #[test]
    fn scalings_are_level_rescalings(f in signal(7), fb in filter()) {
        let o = cascade_forward(&f, &fb, Scaling::Orthonormal).unwrap();
        let a = cascade_forward(&f, &fb, Scaling::AScaled).unwrap();
        let b = cascade_forward(&f, &fb, Scaling::BScaled).unwrap();
        for (pos, (idx, v)) in o.iter().enumerate() {
            prop_assert!((a.values[pos] - v * 2f64.powf(-(idx.level as f64) / 2.0)).abs() <= 1e-9 * (1.0 + v.abs()));
            prop_assert!((b.values[pos] - v * 2f64.powf(idx.level as f64 / 2.0)).abs() <= 1e-9 * (1.0 + v.abs()) * 2f64.powf(idx.level as f64 / 2.0));
        }
    }

    #[test]
    fn flat_index_is_a_bijection(l in 0u32..12) {
        let n = 1usize << l;
        for flat in 1..=n {
            let idx = WaveletIndex::from_flat(flat, n).unwrap();
            prop_assert_eq!(idx.flat(n).unwrap(), flat);
            let pos = flat - 1;
            if pos >= 2 {
                let parent = WaveletIndex::from_flat(pos / 2 + 1, n).unwrap();
                prop_assert_eq!(parent.level, idx.level + 1);
                prop_assert_eq!(parent.shift, idx.shift / 2);
            }
        }
    }

    #[test]
    fn lp_error_is_zero_on_identity(f in signal(6), p in norm()) {
        prop_assert_eq!(lp_error(&f, &f, p, None).unwrap(), 0.0);
    }

    #[test]
    fn greedy_matches_offline_sort(f in signal(12), b in 0usize..40, p in norm(), fb in filter()) {
        let b = b.min(f.len());
        let (r, stats) = greedy_select_with_stats(&f, b, p, &fb).unwrap();
        let mut want = greedy_offline(&f, b, p, &fb).unwrap();
        want.sort_unstable();
        let got: Vec<usize> = r.terms.iter().map(|t| t.flat).collect();
        prop_assert_eq!(got, want);
        let levels = f.len().trailing_zeros() as usize;
        prop_assert!(stats.peak_live <= b + levels * (2 * fb.q() + 1));
        let check = r.error(&f, p, None).unwrap();
        prop_assert!((check - r.reported_error).abs() <= 1e-9 * (1.0 + check));
    }

    #[test]
    fn greedy_l2_error_is_discarded_energy(f in signal(10), b in 0usize..64, fb in filter()) {
        let b = b.min(f.len());
        let r = greedy_select(&f, b, LpNorm::TWO, &fb).unwrap();
        let c = cascade_forward(&f, &fb, Scaling::Orthonormal).unwrap();
        let kept: std::collections::HashSet<usize> = r.terms.iter().map(|t| t.flat).collect();
        let energy: f64 = c.values.iter().enumerate().filter(|(i, _)| !kept.contains(&(i + 1))).map(|(_, v)| v * v).sum();
        prop_assert!((r.reported_error - energy.sqrt()).abs() <= 1e-9 * (1.0 + energy.sqrt()));
    }

    #[test]
    fn universal_contains_every_top_set(f in signal(8), b in 0usize..8, fb in filter()) {
        let b = b.min(f.len());
        let u = universal_select(&f, b, &fb).unwrap();
        let set: std::collections::HashSet<usize> = u.terms.iter().map(|t| t.flat).collect();
        let norms = universal_norms(f.len()).unwrap();
        let levels = f.len().trailing_zeros().max(1) as usize;
        prop_assert!(u.terms.len() <= b * levels * levels + b);
        for p in norms {
            for t in greedy_select(&f, b, p, &fb).unwrap().terms {
                prop_assert!(set.contains(&t.flat));
            }
        }
    }

    #[test]
    fn image_round_trip(w in 1u32..6, h in 1u32..6, seed in prop::collection::vec(0.0..255.0f64, 1024), fb in filter()) {
        let (w, h) = (1usize << w, 1usize << h);
        let img = Image::new(w, h, seed[..w * h].to_vec()).unwrap();
        let t = transform2d(&img, &fb).unwrap();
        let back = wavecode::image2d::inverse2d(&t, &fb).unwrap();
        for (a, b) in back.pixels.iter().zip(&img.pixels) {
            prop_assert!((a - b).abs() <= 1e-9 * 255.0);
        }
        let all = greedy2d(&img, w * h, LpNorm::INF, &fb).unwrap();
        for (a, b) in all.reconstruction.pixels.iter().zip(&img.pixels) {
            prop_assert!((a - b).abs() <= 1e-9 * 255.0);
        }
    }

    #[test]
    fn representation_text_round_trips(f in signal(6), b in 0usize..8, p in norm(), fb in filter()) {
        let r = greedy_select(&f, b.min(f.len()), p, &fb).unwrap();
        let text = r.to_text();
        let back = Representation::from_text(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.reconstruct().unwrap(), r.reconstruct().unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn haar_dp_approximation_chain(f in oracle_signal(), b in 1usize..=3, p in small_norm()) {
        let haar = FilterBank::haar();
        let eps = 0.05;
        let opt = brute_force_unrestricted(&f, b, p, &haar).unwrap().error;
        let rest_bf = brute_force_restricted(&f, b, p, &haar).unwrap().error;
        let (r, stats) = fptas_with(&f, b, p, None, &FptasConfig::new(eps)).unwrap();
        prop_assert!(opt <= r.reported_error + 1e-9);
        prop_assert!(r.reported_error <= (1.0 + eps) * opt + 1e-9);
        prop_assert!(r.reported_error <= (1.0 + eps) * rest_bf + 1e-9);
        prop_assert!(r.terms.len() <= b);
        prop_assert!(stats.peak_live_tables() <= 3 + 2);
        let check = r.error(&f, p, None).unwrap();
        prop_assert!((check - r.reported_error).abs() <= 1e-9 * (1.0 + check));

        let rest = rest_optimal(&f, b, p, None).unwrap();
        prop_assert!(rest.reported_error <= rest_bf + 1e-9);
        prop_assert!((rest.reported_error - rest_bf).abs() <= 1e-9);
        let h = hybrid(&f, b, p, eps, None).unwrap();
        prop_assert!(h.reported_error <= (1.0 + eps) * rest.reported_error + 1e-9);
        prop_assert!(h.reported_error + 1e-9 >= opt);
    }

    #[test]
    fn haar_dp_is_deterministic(f in oracle_signal(), b in 1usize..=3, p in small_norm()) {
        let a = fptas(&f, b, p, 0.1, None).unwrap().to_text();
        let c = fptas(&f, b, p, 0.1, None).unwrap().to_text();
        prop_assert_eq!(a, c);
    }

    #[test]
    fn greedy_within_constant_of_optimum(f in oracle_signal(), b in 0usize..=3, p in small_norm(), fb in filter()) {
        let opt = brute_force_unrestricted(&f, b, p, &fb).unwrap().error;
        let g = greedy_select(&f, b, p, &fb).unwrap().reported_error;
        let q = fb.q() as f64;
        prop_assert!(g <= 8.0 * q.powf(1.5) * 3.0 * opt + 1e-9);
    }

    #[test]
    fn best_basis_equals_cut_enumeration(f in oracle_signal(), b in 0usize..=3, p in small_norm()) {
        let dp = best_basis_select(&f, b, p, Inner::Greedy, 1).unwrap();
        let bf = brute_force_cut(&f, b, p, 1, |blk, bb| Ok(Inner::Greedy.run(blk, bb, p)?.reported_error)).unwrap();
        prop_assert_eq!(dp.error, bf.error);
        prop_assert_eq!(bf.cuts_examined, 26);
        prop_assert!(dp.terms_used() <= b);
        let rec = dp.reconstruct().unwrap();
        prop_assert!((lp_error(&f, &rec, p, None).unwrap() - dp.error).abs() <= 1e-9 * (1.0 + dp.error));
        if b < 3 {
            let more = best_basis_select(&f, b + 1, p, Inner::Greedy, 1).unwrap();
            prop_assert!(more.error <= dp.error);
        }
    }

    #[test]
    fn spectrum_bound_and_budget(f in oracle_signal(), costs in prop::collection::vec(1u64..6, 8), budget in 0u64..20, p in small_norm()) {
        let haar = FilterBank::haar();
        let s = spectrum_select(&f, &costs, budget, p, &haar).unwrap();
        prop_assert!(s.cost_bits <= budget);
        let mut supports = Vec::new();
        for mask in 0u32..256 {
            let set: Vec<usize> = (0..8).filter(|i| mask >> i & 1 == 1).collect();
            if set.len() <= 4 && set.iter().map(|&i| costs[i]).sum::<u64>() <= budget {
                supports.push(set);
            }
        }
        // supports of more than four terms cost at least five bits
        if budget < 5 {
            let opt = unrestricted_over(&f, p, &haar, supports).unwrap().error;
            prop_assert!(s.lower_bound <= opt + 1e-9);
        }
    }

    #[test]
    fn spectrum_l2_error_shrinks_with_budget(f in signal(6), costs_seed in 1u64..1000, budget in 0u64..60) {
        let n = f.len();
        let costs: Vec<u64> = (0..n as u64).map(|i| 1 + (i * costs_seed) % 5).collect();
        let haar = FilterBank::haar();
        let a = spectrum_select(&f, &costs, budget, LpNorm::TWO, &haar).unwrap();
        let b = spectrum_select(&f, &costs, budget + 3, LpNorm::TWO, &haar).unwrap();
        prop_assert!(b.repr.reported_error <= a.repr.reported_error + 1e-9);
    }

    #[test]
    fn bit_accounting_stays_in_budget(f in signal(6), budget in 0u64..400, frac in 0u32..20, wide in any::<bool>()) {
        let haar = FilterBank::haar();
        let coding = if wide { IndexCoding::ScaleAware } else { IndexCoding::Flat };
        let costs = coding.costs(f.len());
        let coder = FixedPoint::for_values(&f, frac + 8);
        let r = bitcomplexity_select(&f, &costs, &coder, budget, LpNorm::INF, &haar).unwrap();
        prop_assert!(r.cost_bits <= budget);
        let planes = vec![f.clone(), f.iter().map(|v| v * 0.5 - 1.0).collect()];
        let m = multiplane_select(&planes, budget, coding, u64::from(frac) + 4, &haar).unwrap();
        prop_assert!(m.cost_bits <= budget);
    }
}

#[test]
fn lemma3_product_bound_and_influence() {
    for fb in FilterBank::all() {
        let q = fb.q() as f64;
        for l in 1..=10u32 {
            let n = 1usize << l;
            for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                let p = LpNorm::new(p).unwrap();
                let a = LevelNorms::get(&fb, n, p).unwrap();
                let b = LevelNorms::get(&fb, n, p.conjugate()).unwrap();
                for j in 1..=l as usize {
                    assert!(a.detail[j] * b.detail[j] <= q.sqrt() * LEMMA3_C, "{} n={n} j={j}", fb.name());
                }
            }
        }
        for l in 1..=8u32 {
            let n = 1usize << l;
            let vs: Vec<Vec<f64>> = (1..=n)
                .map(|flat| basis_vector(WaveletIndex::from_flat(flat, n).unwrap(), n, &fb, Scaling::Orthonormal).unwrap())
                .collect();
            for t in 0..n {
                let live = vs.iter().filter(|v| v[t].abs() > 1e-12).count();
                assert!(live as f64 <= 4.0 * q * f64::from(l), "{} n={n} t={t}: {live}", fb.name());
            }
        }
    }
}

#[test]
fn greedy_linf_can_grow_when_budget_grows() {
    // adding the next coefficient can move the residual maximum
    let f = [0.5, -0.25, -9.75, -8.0, 7.0, -3.75, -3.0, 1.25];
    let haar = FilterBank::haar();
    let e2 = greedy_select(&f, 2, LpNorm::INF, &haar).unwrap().reported_error;
    let e3 = greedy_select(&f, 3, LpNorm::INF, &haar).unwrap().reported_error;
    assert_abs_diff_eq!(e2, 5.25, epsilon = 1e-9);
    assert_abs_diff_eq!(e3, 5.375, epsilon = 1e-9);
    let s2 = spectrum_select(&f, &[1; 8], 2, LpNorm::INF, &haar).unwrap();
    let s3 = spectrum_select(&f, &[1; 8], 3, LpNorm::INF, &haar).unwrap();
    assert!(s3.repr.reported_error > s2.repr.reported_error);
}

#[test]
fn cut_counts_follow_recurrence() {
    for (blocks, c) in [(2usize, 2u128), (4, 5), (8, 26)] {
        assert_eq!(cut_count(blocks), Some(c));
        assert_eq!(enumerate_cuts(blocks, 1).unwrap().len() as u128, c);
    }
}

#[test]
fn image_parseval_on_cards() {
    for size in [8usize, 16, 64] {
        let img = Image::test_card(size, size).unwrap();
        for fb in FilterBank::all() {
            let t = transform2d(&img, &fb).unwrap();
            let ep: f64 = img.pixels.iter().map(|v| v * v).sum();
            let ec: f64 = t.values.iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(ep, ec, epsilon = 1e-9 * ep);
        }
    }
}

#[test]
fn image_tuned_selection_is_not_always_better() {
    // greedy is only approximately optimal away from p = 2
    let img = Image::test_card(8, 8).unwrap();
    let fb = FilterBank::haar();
    let tuned = greedy2d(&img, 4, LpNorm::INF, &fb).unwrap();
    let two = greedy2d(&img, 4, LpNorm::TWO, &fb).unwrap();
    let et = image_errors(&img, &tuned.reconstruction, &[LpNorm::INF]).unwrap()[0].1;
    let e2 = image_errors(&img, &two.reconstruction, &[LpNorm::INF]).unwrap()[0].1;
    assert_abs_diff_eq!(et, 84.21875, epsilon = 1e-9);
    assert_abs_diff_eq!(e2, 78.125, epsilon = 1e-9);
}
