use proptest::prelude::*;

use steinclt::bias::{Family, SumModel};
use steinclt::bounds::{bound_m1, bound_m3, h_ab, m1_slope};
use steinclt::function::{Profile, Ridge};
use steinclt::stein::{log_envelope_integral, log_envelope_quadrature, u_alpha};
use steinclt::tensor::{norm, SymTensor};
use steinclt::wasserstein::{w1_exact, EmpiricalMeasure};

// Dense sphere grid: a lower bound on the injective norm, accurate to
// roughly r²(step/2)² relative.
fn grid_norm(t: &SymTensor) -> f64 {
    match t.dim() {
        1 => t.entries()[0].abs(),
        2 => {
            let n = 20_000;
            (0..n)
                .map(|k| {
                    let a = std::f64::consts::PI * k as f64 / n as f64;
                    t.pure_form(&[a.cos(), a.sin()]).abs()
                })
                .fold(0.0, f64::max)
        }
        3 => {
            let (nt, np) = (300, 600);
            let mut best = 0.0f64;
            for i in 0..=nt {
                let th = std::f64::consts::PI * i as f64 / nt as f64;
                for j in 0..np {
                    let ph = 2.0 * std::f64::consts::PI * j as f64 / np as f64;
                    let v = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                    best = best.max(t.pure_form(&v).abs());
                }
            }
            best
        }
        _ => unreachable!(),
    }
}

fn tensor_from(order: usize, dim: usize, raw: &[f64]) -> SymTensor {
    let mut t = SymTensor::zeros(order, dim).unwrap();
    let len = t.len();
    t.entries_mut().copy_from_slice(&raw[..len]);
    t
}

fn small_tensor() -> impl Strategy<Value = SymTensor> {
    (1usize..=3, 1usize..=3, prop::collection::vec(-1.0f64..1.0, 10))
        .prop_map(|(order, dim, raw)| tensor_from(order, dim, &raw))
}

fn cloud(m: usize, d: usize) -> impl Strategy<Value = EmpiricalMeasure> {
    prop::collection::vec(-3.0f64..3.0, m * d).prop_map(move |p| EmpiricalMeasure::new(d, p).unwrap())
}

fn brute_force(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> f64 {
    fn go(i: usize, used: &mut [bool], acc: f64, a: &EmpiricalMeasure, b: &EmpiricalMeasure, best: &mut f64) {
        let m = a.len();
        if i == m {
            *best = best.min(acc);
            return;
        }
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                let c = norm(&a.point(i).iter().zip(b.point(j)).map(|(x, y)| x - y).collect::<Vec<_>>());
                go(i + 1, used, acc + c, a, b, best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, &mut vec![false; a.len()], 0.0, a, b, &mut best);
    best / a.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tensor_power_of_unit_vector_has_norm_one(
        order in 1usize..=4,
        raw in prop::collection::vec(-1.0f64..1.0, 1..=4),
    ) {
        let len = norm(&raw);
        prop_assume!(len > 1e-3);
        let u: Vec<f64> = raw.iter().map(|x| x / len).collect();
        let t = SymTensor::tensor_power(&u, order).unwrap();
        prop_assert!((t.injective_norm_default() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn injective_norm_is_absolutely_homogeneous(t in small_tensor(), c in -5.0f64..5.0) {
        let base = t.injective_norm_default();
        let scaled = t.scaled(c).injective_norm_default();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-9 * (1.0 + c.abs() * base));
    }

    #[test]
    fn injective_norm_matches_grid_search(t in small_tensor()) {
        let ascent = t.injective_norm_default();
        let grid = grid_norm(&t);
        prop_assert!((ascent - grid).abs() <= 1e-3 * grid.max(1e-12), "ascent {ascent} grid {grid}");
    }

    #[test]
    fn injective_norm_triangle_inequality(
        (order, dim) in (1usize..=3, 1usize..=3),
        a in prop::collection::vec(-1.0f64..1.0, 10),
        b in prop::collection::vec(-1.0f64..1.0, 10),
    ) {
        let s = tensor_from(order, dim, &a);
        let t = tensor_from(order, dim, &b);
        let sum = grid_norm(&s.add(&t).unwrap());
        prop_assert!(sum <= s.injective_norm_default() + t.injective_norm_default() + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w1_is_symmetric_and_vanishes_on_the_diagonal(
        (a, b) in (1usize..=12, 1usize..=3).prop_flat_map(|(m, d)| (cloud(m, d), cloud(m, d)))
    ) {
        prop_assert_eq!(w1_exact(&a, &a).unwrap(), 0.0);
        let ab = w1_exact(&a, &b).unwrap();
        let ba = w1_exact(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab));
    }

    #[test]
    fn w1_triangle_inequality(
        (a, b, c) in (1usize..=12, 1usize..=3).prop_flat_map(|(m, d)| (cloud(m, d), cloud(m, d), cloud(m, d)))
    ) {
        let ac = w1_exact(&a, &c).unwrap();
        let via = w1_exact(&a, &b).unwrap() + w1_exact(&b, &c).unwrap();
        prop_assert!(ac <= via + 1e-9);
    }

    #[test]
    fn w1_of_a_translate_is_the_shift_length(
        (a, v) in (1usize..=20, 1usize..=3)
            .prop_flat_map(|(m, d)| (cloud(m, d), prop::collection::vec(-2.0f64..2.0, d)))
    ) {
        let moved = a.shifted(&v).unwrap();
        prop_assert!((w1_exact(&a, &moved).unwrap() - norm(&v)).abs() < 1e-9);
    }

    #[test]
    fn w1_matches_brute_force(
        (a, b) in (1usize..=7, 1usize..=3).prop_flat_map(|(m, d)| (cloud(m, d), cloud(m, d)))
    ) {
        prop_assert!((w1_exact(&a, &b).unwrap() - brute_force(&a, &b)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn envelope_is_convex(
        a in 0.05f64..20.0,
        b in 0.05f64..20.0,
        u in 0.0f64..50.0,
        v in 0.0f64..50.0,
    ) {
        let mid = h_ab(a, b, 0.5 * (u + v));
        let chord = 0.5 * (h_ab(a, b, u) + h_ab(a, b, v));
        prop_assert!(mid <= chord + 1e-12 * (1.0 + chord.abs()));
    }

    #[test]
    fn log_envelope_dominates_its_integral(delta in 0.0f64..1e3, eps in 0.01f64..3.0) {
        let closed = log_envelope_integral(delta, eps).unwrap();
        let quad = log_envelope_quadrature(delta, eps, 1e-10).unwrap();
        prop_assert!(quad <= closed + 1e-9, "quadrature {quad} > envelope {closed}");
    }

    #[test]
    fn u_alpha_at_zero_is_the_function(w in -5.0f64..5.0, seed in any::<u64>()) {
        let f = Ridge::new(vec![1.0], Profile::Cos);
        let e = u_alpha(&f, 0.0, &[w], 1000, seed).unwrap();
        prop_assert_eq!(e.mean, w.cos());
        prop_assert_eq!(e.se, 0.0);
    }
}

#[test]
fn envelope_sandwich_on_log_grid() {
    for a in [0.1, 1.0, 10.0] {
        for b in [0.1, 1.0, 10.0] {
            for k in 0..=80 {
                let u = 10f64.powf(-4.0 + 8.0 * k as f64 / 80.0);
                let h = h_ab(a, b, u);
                let lo = (a * u).min(b * u.powf(1.5));
                let hi = (1.5 * a * u).min(b * u.powf(1.5));
                let slack = 1e-12 * hi;
                assert!(lo <= h + slack && h <= hi + slack, "a={a} b={b} u={u}: {lo} <= {h} <= {hi}");
            }
        }
    }
}

#[test]
fn third_moment_bound_scales_exactly_as_inverse_root_n() {
    let cases = [
        (Family::Rademacher, 1),
        (Family::Rademacher, 2),
        (Family::Rademacher, 3),
        (Family::Uniform, 1),
        (Family::Exponential, 1),
        (Family::Gaussian, 1),
        (Family::TwoPoint { p: 0.2 }, 1),
    ];
    for (fam, d) in cases {
        let scaled: Vec<f64> = [25usize, 100, 400]
            .iter()
            .map(|&n| {
                let r = bound_m3(&SumModel::iid_standardized(fam, d, n).unwrap()).unwrap();
                assert!(r.is_exact(), "{} d={d}", fam.name());
                r.total * (n as f64).sqrt()
            })
            .collect();
        for s in &scaled[1..] {
            assert!((s - scaled[0]).abs() < 1e-12, "{} d={d}: {scaled:?}", fam.name());
        }
    }
    // single Rademacher coordinate: E|X|³ = 1, so the constant is 1/2
    let r = bound_m3(&SumModel::iid_standardized(Family::Rademacher, 1, 100).unwrap()).unwrap();
    assert!((r.total - 0.05).abs() < 1e-15);
}

#[test]
fn first_order_bound_is_nondecreasing_in_dimension() {
    for d in 1..12 {
        assert!(m1_slope(d + 1) > m1_slope(d));
    }
    for fam in [Family::Rademacher, Family::Uniform] {
        for n in [4, 100, 10_000] {
            let totals: Vec<f64> = (1..=6)
                .map(|d| bound_m1(&SumModel::iid_standardized(fam, d, n).unwrap()).unwrap().total)
                .collect();
            assert!(totals.windows(2).all(|w| w[1] >= w[0]), "{} n={n}: {totals:?}", fam.name());
        }
    }
}
