//! Exact and interval arithmetic for numbers generated by F(t) = 3^t - 1
//! and its inverse, supporting certified comparison of tower-sized values.

mod error;
mod expr;
pub mod interval;
mod real;

pub use error::TowerError;
pub use expr::{TowerExpr, EXACT_EXP_MAX, INC_MAX, LIT_MAX};
pub use interval::{
    bf_to_f64, f64_down, f64_up, Interval, MAX_PRECISION, MIN_PRECISION, PRECISION_LADDER,
};
pub use real::{
    compare, compare_expr, compare_report, eval_enclosure, eval_enclosure_expr, exact_feasible,
    f_apply, threshold, Enclosure, TowerReal,
};

#[cfg(test)]
mod tests {
    use std::cmp::Ordering;

    use num_bigint::BigUint;

    use super::*;

    fn exact(n: u64) -> TowerReal {
        TowerReal::exact(TowerExpr::lit(n).unwrap())
    }

    /// Certified rational bounds on log_3(num/den) by integer bisection:
    /// each step decides 3^a * den^b <= num^b with exact arithmetic.
    /// Test oracle, independent of the floating-point path.
    fn log3_bisect(num: u64, den: u64, iters: u32) -> (f64, f64) {
        let num = BigUint::from(num);
        let den = BigUint::from(den);
        let (mut lo_n, mut lo_d) = (0u64, 1u64);
        let (mut hi_n, mut hi_d) = (4u64, 1u64);
        for _ in 0..iters {
            let mid_n = lo_n * hi_d + hi_n * lo_d;
            let mid_d = 2 * lo_d * hi_d;
            let g = gcd(mid_n, mid_d);
            let (mn, md) = (mid_n / g, mid_d / g);
            if md > 1 << 24 {
                break;
            }
            let lhs = BigUint::from(3u32).pow(mn as u32) * den.pow(md as u32);
            let rhs = num.pow(md as u32);
            if lhs <= rhs {
                lo_n = mn;
                lo_d = md;
            } else {
                hi_n = mn;
                hi_d = md;
            }
        }
        (lo_n as f64 / lo_d as f64, hi_n as f64 / hi_d as f64)
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a.max(1)
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn log3_bisect_oracle_sane() {
        let (lo, hi) = log3_bisect(2, 1, 60);
        assert!(lo <= 0.6309297535714574 && 0.6309297535714574 <= hi);
        assert!(hi - lo < 1e-6);
    }

    #[test]
    fn f_apply_examples() {
        assert!(f_apply(&TowerReal::Zero, 5).is_zero());
        let one = exact(1);
        let two = f_apply(&one, 1);
        assert_eq!(compare(&two, &exact(2)).unwrap(), Ordering::Equal);
        let eight = f_apply(&two, 1);
        assert_eq!(compare(&eight, &exact(8)).unwrap(), Ordering::Equal);
        let big = f_apply(&eight, 1);
        assert_eq!(compare(&big, &exact(6560)).unwrap(), Ordering::Equal);
    }

    #[test]
    fn inverse_of_one_is_log3_2() {
        let x = f_apply(&exact(1), -1);
        let (olo, ohi) = log3_bisect(2, 1, 60);
        match eval_enclosure(&x, 64).unwrap() {
            Enclosure::Level { level, lo, hi } => {
                assert_eq!(level, 0);
                assert!(f64_down(&lo) <= ohi && f64_up(&hi) >= olo);
                assert!(f64_down(&lo) > 0.63092 && f64_up(&hi) < 0.63094);
            }
            Enclosure::Zero => panic!("nonzero"),
        }
    }

    #[test]
    fn compare_small_inequality() {
        // F^1(1)+1 = 3 against F^2(1)-1 = 7
        let a = TowerExpr::inc(TowerExpr::f_app(1, TowerExpr::one()), 1).unwrap();
        let b = TowerExpr::inc(TowerExpr::f_app(2, TowerExpr::one()), -1).unwrap();
        assert_eq!(a, TowerExpr::Lit(3));
        assert_eq!(b, TowerExpr::Lit(7));
        assert_eq!(compare_expr(&a, &b).unwrap(), Ordering::Less);
    }

    #[test]
    fn compare_deep_towers_by_shift() {
        let a = TowerExpr::f_app(11, TowerExpr::lit(3).unwrap());
        let b = TowerExpr::f_app(19, TowerExpr::one());
        assert_eq!(compare_expr(&a, &b).unwrap(), Ordering::Less);
        assert_eq!(compare_expr(&b, &a).unwrap(), Ordering::Greater);
    }

    #[test]
    fn compare_reflexive_on_canonical_forms() {
        for s in ["0", "5", "F^9(1)", "F^11(3)", "F^2(1)+1", "F^6(2)-3"] {
            let e: TowerExpr = s.parse().unwrap();
            assert_eq!(compare_expr(&e, &e).unwrap(), Ordering::Equal);
        }
    }

    #[test]
    fn exact_inverse_unfolds_powers_of_three() {
        // F^{-1}(6560) = 8 exactly (3^8 = 6561)
        let x = TowerReal::exact_inv(1, TowerExpr::lit(6560).unwrap());
        assert_eq!(compare(&x, &exact(8)).unwrap(), Ordering::Equal);
        // F^{-2}(2) = log_3 2 = F^{-1}(1)
        let a = TowerReal::exact_inv(2, TowerExpr::lit(2).unwrap());
        let b = TowerReal::exact_inv(1, TowerExpr::lit(1).unwrap());
        assert_eq!(compare(&a, &b).unwrap(), Ordering::Equal);
    }

    #[test]
    fn enclosure_of_double_inverse() {
        // F^{-2}(1) = log_3(1 + log_3 2); the digits are frozen from the
        // integer-bisection oracle below
        let x = TowerReal::exact_inv(2, TowerExpr::one());
        let e = eval_enclosure(&x, 128).unwrap();
        assert!(e.width_f64(128) < 1e-20);
        let iv = e.value_interval(128).unwrap();
        assert!(iv.lo_f64() > 0.4452437481461050 && iv.hi_f64() < 0.4452437481461056);
        // oracle: 3^v = 1 + log_3 2 with log_3 2 in [l2lo, l2hi] implies
        // 3^(v*d) bounded by (1 + l2)^d; check at v = 0.44524374814
        let (l2lo, l2hi) = log3_bisect(2, 1, 60);
        let target = 1.0 + 0.6309297535714574;
        assert!(1.0 + l2lo <= target && target <= 1.0 + l2hi + 1e-9);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(
            compare(&threshold(1, 0), &exact(2)).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            compare(&threshold(4, 4), &exact(1)).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            compare(&threshold(3, 0), &exact(6560)).unwrap(),
            Ordering::Equal
        );
        // k - n < 0 gives an exact symbolic inverse, here F^{-2}(1)
        let t = threshold(0, 2);
        let e = eval_enclosure(&t, 128).unwrap();
        let iv = e.value_interval(128).unwrap();
        assert!(iv.lo_f64() > 0.445 && iv.hi_f64() < 0.446);
    }

    #[test]
    fn precision_widening_never_flips() {
        let pairs = [
            ("F^4(1)-1", "F^2(1)"),
            ("F^11(3)", "F^19(1)"),
            ("F^2(1)+1", "F^3(1)-1"),
        ];
        for (sa, sb) in pairs {
            let a: TowerExpr = sa.parse().unwrap();
            let b: TowerExpr = sb.parse().unwrap();
            let first = compare_expr(&a, &b).unwrap();
            assert_eq!(compare_expr(&a, &b).unwrap(), first);
            let ea = eval_enclosure_expr(&a, 4096).unwrap();
            let eb = eval_enclosure_expr(&b, 4096).unwrap();
            if let (Enclosure::Level { level: la, .. }, Enclosure::Level { level: lb, .. }) =
                (&ea, &eb)
            {
                if la != lb {
                    let by_level = if la < lb {
                        Ordering::Less
                    } else {
                        Ordering::Greater
                    };
                    assert_eq!(first, by_level);
                }
            }
        }
    }

    #[test]
    fn round_trip_shift_containment() {
        let x = TowerReal::exact_inv(1, TowerExpr::lit(5).unwrap());
        for j in [1i64, 3, 7, 20] {
            let back = f_apply(&f_apply(&x, j), -j);
            assert_eq!(compare(&back, &x).unwrap(), Ordering::Equal);
        }
    }

    #[test]
    fn eval_enclosure_boundary_of_one() {
        // exact 1 normalizes to level 1 with mantissa at the log_3 2 edge
        match eval_enclosure(&exact(1), 64).unwrap() {
            Enclosure::Level { level, lo, hi } => {
                assert_eq!(level, 1);
                assert!(f64_up(&hi) < 0.6310);
                assert!(f64_down(&lo) > 0.6308);
            }
            Enclosure::Zero => panic!("nonzero"),
        }
    }

    #[test]
    fn eval_enclosure_rejects_bad_precision() {
        assert!(matches!(
            eval_enclosure(&exact(1), 32),
            Err(TowerError::BadPrecision(32))
        ));
        assert!(matches!(
            eval_enclosure(&exact(1), 8192),
            Err(TowerError::BadPrecision(8192))
        ));
    }

    #[test]
    fn adjacent_towers_resolve_only_within_exact_guard() {
        // F^4(1) +/- 1 still evaluates exactly and is decided there
        let lo: TowerExpr = "F^4(1)-1".parse().unwrap();
        let mid: TowerExpr = "F^4(1)".parse().unwrap();
        let hi: TowerExpr = "F^4(1)+1".parse().unwrap();
        assert_eq!(compare_expr(&lo, &mid).unwrap(), Ordering::Less);
        assert_eq!(compare_expr(&mid, &hi).unwrap(), Ordering::Less);
        // F^9(1) +/- 1 differ by less than any representable gap and sit
        // beyond the exact-evaluation guard: the comparison refuses to
        // guess instead of claiming a verdict
        let lo: TowerExpr = "F^9(1)-1".parse().unwrap();
        let mid: TowerExpr = "F^9(1)".parse().unwrap();
        assert!(matches!(
            compare_expr(&lo, &mid),
            Err(TowerError::UnresolvedComparison { .. })
        ));
    }
}
