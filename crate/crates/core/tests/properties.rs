use proptest::prelude::*;
use ym_core::construct::{density_young_measure, pushforward_young_measure};
use ym_core::convergence::{oscillating_sequence, BorelTestSet};
use ym_core::exprfn::{
    parse_expression, FunctionKind, PartitionedFunction, Piece, DEFAULT_INVERT_TOL, VALIDATION_GRID,
};
use ym_core::{fixtures, HomogeneousYoungMeasure, SupportInterval};

const SET_TOL: f64 = 1e-10;

/// `s * (a x + b x^3 + c exp(d x))` on `[lo, hi]`; strictly monotone since
/// `a > 0` and `b, c, d >= 0`.
fn monotone_piece() -> impl Strategy<Value = Piece> {
    (
        0.1f64..5.0,
        0.0f64..3.0,
        0.0f64..3.0,
        0.0f64..2.0,
        -2.0f64..1.0,
        0.2f64..2.0,
        any::<bool>(),
    )
        .prop_map(|(a, b, c, d, lo, width, increasing)| {
            let body = format!("{a}*x + {b}*x^3 + {c}*exp({d}*x)");
            let src = if increasing { body } else { format!("3 - ({body})") };
            Piece::new(lo, lo + width, parse_expression(&src).unwrap()).unwrap()
        })
}

fn interior_fraction() -> impl Strategy<Value = f64> {
    0.001f64..0.999
}

fn standard_measures() -> Vec<(String, HomogeneousYoungMeasure)> {
    let mut out = Vec::new();
    for (name, u, k) in fixtures::standard() {
        if let Ok(nu) = density_young_measure(&u, &k) {
            out.push((format!("{name} density"), nu));
        }
        out.push((
            format!("{name} pushforward"),
            pushforward_young_measure(&u, &k).unwrap(),
        ));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn inversion_round_trip(p in monotone_piece(), t in interior_fraction()) {
        let (lo, hi) = p.image();
        let y = lo + t * (hi - lo);
        let x = p.invert(y, DEFAULT_INVERT_TOL).unwrap();
        let back = p.value(x).unwrap();
        prop_assert!((back - y).abs() <= DEFAULT_INVERT_TOL * y.abs().max(1.0), "y = {y}, u(x) = {back}");
    }

    #[test]
    fn derivative_matches_central_differences(p in monotone_piece()) {
        let h = 1e-5 * p.length();
        for k in 1..=101 {
            let x = p.lo() + p.length() * k as f64 / 102.0;
            let exact = p.derivative().eval(x).unwrap();
            let fd = (p.value(x + h).unwrap() - p.value(x - h).unwrap()) / (2.0 * h);
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "x = {x}: {fd} vs {exact}");
        }
    }

    #[test]
    fn inverse_derivative_times_slope_is_one(p in monotone_piece(), t in interior_fraction()) {
        let (lo, hi) = p.image();
        let y = lo + t * (hi - lo);
        let x = p.invert(y, DEFAULT_INVERT_TOL).unwrap();
        let product = p.inverse_derivative(y).unwrap() * p.derivative().eval(x).unwrap().abs();
        prop_assert!((product - 1.0).abs() <= 1e-9, "product {product}");
    }

    #[test]
    fn validated_pieces_are_strictly_monotone(
        a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, split in 0.2f64..0.8,
    ) {
        let pieces = vec![
            Piece::new(0.0, split, parse_expression(&format!("{a}*x^2 + {b}*x")).unwrap()).unwrap(),
            Piece::new(split, 1.0, parse_expression(&format!("{c}*x^3 + {b}*x")).unwrap()).unwrap(),
        ];
        let u = PartitionedFunction::new((0.0, 1.0), FunctionKind::Invertible, pieces).unwrap();
        let (lo, hi) = u.image_hull();
        prop_assume!(hi > lo);
        let report = u.validate(&SupportInterval::new(lo, hi).unwrap());
        if report.structure_ok() {
            for p in u.pieces() {
                let h = p.length() / (VALIDATION_GRID + 1) as f64;
                let values: Vec<f64> = (0..=VALIDATION_GRID + 1).map(|k| p.value(p.lo() + h * k as f64).unwrap()).collect();
                let up = values.windows(2).all(|w| w[1] > w[0]);
                let down = values.windows(2).all(|w| w[1] < w[0]);
                prop_assert!(up || down, "{} passed validation", p.expr());
            }
        }
    }

    #[test]
    fn cdf_is_monotone(s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let (y1, y2) = if s <= t { (s, t) } else { (t, s) };
        for (name, nu) in standard_measures() {
            let (f1, f2) = (nu.cdf(y1).unwrap(), nu.cdf(y2).unwrap());
            prop_assert!(f1 <= f2 + 1e-12, "{name}: F({y1}) = {f1} > F({y2}) = {f2}");
        }
    }

    #[test]
    fn measures_are_additive(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, d in 0.0f64..1.0) {
        let mut cuts = [a, b, c, d];
        cuts.sort_by(f64::total_cmp);
        prop_assume!(cuts[1] < cuts[2]);
        let first = BorelTestSet::new_unchecked("A", vec![(cuts[0], cuts[1])]);
        let second = BorelTestSet::new_unchecked("B", vec![(cuts[2], cuts[3])]);
        let union = BorelTestSet::new_unchecked("A ∪ B", vec![(cuts[0], cuts[1]), (cuts[2], cuts[3])]);
        for (name, nu) in standard_measures() {
            let whole = nu.measure_of_set(&union, SET_TOL).unwrap();
            let parts = nu.measure_of_set(&first, SET_TOL).unwrap() + nu.measure_of_set(&second, SET_TOL).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-9, "{name}: {whole} vs {parts}");
        }
    }

    #[test]
    fn oscillation_keeps_the_density(level in 0u32..=6, t in interior_fraction()) {
        let l = 1usize << level;
        let k = SupportInterval::unit();
        for base in [fixtures::sawtooth(), fixtures::identity(), fixtures::oscillation3()] {
            let rescaled = oscillating_sequence(&base, l).unwrap();
            let g0 = density_young_measure(&base, &k).unwrap();
            let gl = density_young_measure(&rescaled, &k).unwrap();
            let (a, b) = (g0.as_density().unwrap().density(t), gl.as_density().unwrap().density(t));
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "l = {l}, y = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn cdf_matches_measure_of_initial_segments() {
    let k = SupportInterval::unit();
    for (name, nu) in standard_measures() {
        for y in k.grid(101) {
            let set = BorelTestSet::new_unchecked("[0, y]", vec![(0.0, y)]);
            let direct = nu.measure_of_set(&set, SET_TOL).unwrap();
            let cdf = nu.cdf(y).unwrap();
            assert!((direct - cdf).abs() <= 1e-9, "{name} at {y}: {direct} vs {cdf}");
        }
    }
}

#[test]
fn constructed_measures_are_normalized() {
    for (name, nu) in standard_measures() {
        let check = nu.check_probability(1e-9).unwrap();
        assert!(check.normalized, "{name}: mass {}", check.mass);
    }
}
