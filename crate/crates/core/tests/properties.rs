//! Randomized invariants.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lyap3::bvp::{shoot, solve_bc1, Bc1Config};
use lyap3::equation::{Coefficient, Equation, IvpConfig};
use lyap3::error::Error;
use lyap3::lyapunov::{threshold, threshold_power, verify_bc1, zero_count_bound, InequalityKind, InequalityReport, Verdict};
use lyap3::oscillation::{gap_series, holder_gap_check, zeros_of};
use lyap3::psi::power_psi;
use lyap3::report::{render, Format, Record};
use lyap3::scenario::{random_trig_q, Scenario};

fn linear(lambda: f64) -> Equation {
    Equation::linear(Coefficient::constant(lambda))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn threshold_matches_power_closed_form(a in -5.0..5.0f64, len in 0.05..10.0f64, a1 in 0.2..4.0f64, a2 in 0.2..4.0f64) {
        let b = a + len;
        let t = threshold_power(a, b, a1, a2).unwrap();
        let exact = (2.0 / len).powf(a2 * (1.0 + a1));
        prop_assert!((t - exact).abs() <= 1e-12 * exact);
        let generic = threshold(a, b, &power_psi(a1).unwrap(), &power_psi(a2).unwrap()).unwrap();
        prop_assert!((generic - t).abs() <= 1e-9 * t);
    }

    #[test]
    fn threshold_shrinks_with_length(a in -5.0..5.0f64, len in 0.05..10.0f64, grow in 1.01..3.0f64, a1 in 0.2..4.0f64, a2 in 0.2..4.0f64) {
        let short = threshold_power(a, a + len, a1, a2).unwrap();
        let long = threshold_power(a, a + grow * len, a1, a2).unwrap();
        prop_assert!(long < short);
    }

    #[test]
    fn power_psi_odd_increasing_invertible(alpha in 0.2..5.0f64, s in 1e-3..50.0f64, ds in 1e-3..5.0f64) {
        let psi = power_psi(alpha).unwrap();
        prop_assert_eq!(psi.eval(-s), -psi.eval(s));
        prop_assert!(psi.eval(s + ds) > psi.eval(s));
        let back = psi.inverse(psi.eval(s)).unwrap();
        prop_assert!((back - s).abs() <= 1e-9 * s);
    }

    #[test]
    fn verdict_is_consistent_with_margin(lhs in 0.0..20.0f64, thr in 0.1..20.0f64, err in 0.0..1.0f64) {
        let r = InequalityReport::new(InequalityKind::Thm21, (0.0, 1.0, None), Some(0.5), lhs, thr, err);
        let expected = if lhs - thr > err { Verdict::Holds } else if lhs - thr < -err { Verdict::Fails } else { Verdict::Inconclusive };
        prop_assert_eq!(r.verdict, expected);
        prop_assert_eq!(r.holds, expected == Verdict::Holds);
    }

    #[test]
    fn csv_rows_match_header_width(lhs in -1e6..1e6f64, thr in 1e-3..1e3f64, err in 0.0..1.0f64) {
        let r = InequalityReport::new(InequalityKind::Thm22Full, (0.0, 1.0, Some(2.0)), None, lhs, thr, err);
        let csv = render(&[r.clone(), r], Format::Csv);
        let width = <InequalityReport as Record>::header().len();
        for line in csv.lines() {
            prop_assert_eq!(line.split(',').count(), width);
        }
    }

    #[test]
    fn scenario_toml_round_trip(seed in any::<u64>(), lo in -3.0..3.0f64, len in 0.1..5.0f64, slope in 0.1..10.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_trig_q(&mut rng, lo, lo + len, 3, [20.0, 120.0], 60.0);
        let mut s = Scenario::from_toml("[q]\nkind = \"constant\"\nvalue = 1.0\n").unwrap();
        s.q = q;
        s.interval.a = lo;
        s.interval.b = lo + len;
        s.bc1.slope = slope;
        let back = Scenario::from_toml(&s.to_toml()).unwrap();
        prop_assert_eq!(back, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn zero_gaps_positive_and_dominated(lambda in 5.0..400.0f64, curvature in -2.0..2.0f64) {
        let eq = linear(lambda);
        let t = shoot(&eq, 0.0, 1.0, curvature, 8.0, &IvpConfig::default()).unwrap();
        let z = zeros_of(&t);
        prop_assume!(z.len() >= 3);
        prop_assert!(gap_series(&z).unwrap().iter().all(|&g| g > 0.0));
        let rec = holder_gap_check((z[0], z[1], z[2]), &eq, 2.0, &t).unwrap();
        prop_assert!(rec.dominated(), "{:?}", rec);
    }

    #[test]
    fn linear_bc1_above_critical_holds(lambda in 28.0..300.0f64) {
        let eq = linear(lambda);
        match solve_bc1(&eq, 0.0, 1.0, &Bc1Config::default()) {
            Ok(sol) => {
                let r = verify_bc1(&sol, &eq).unwrap();
                prop_assert_eq!(r.verdict, Verdict::Holds);
            }
            Err(e) => prop_assert!(e.is_no_solution(), "{}", e),
        }
    }

    #[test]
    fn zero_count_within_bound(lambda in 20.0..500.0f64, len in 1.0..6.0f64) {
        let eq = linear(lambda);
        let t = shoot(&eq, 0.0, 1.0, 0.0, len, &IvpConfig::default()).unwrap();
        let r = zero_count_bound(&t, 0.0, len, &eq, 129);
        prop_assume!(!matches!(r, Err(Error::TooFewZeros { .. })));
        let r = r.unwrap();
        prop_assert!(r.holds(), "{:?}", r);
    }
}
