//! Joint densities seen by the `f` (check-node) and `g` (variable-node)
//! updates of one polar butterfly.
//!
//! With `x_a = u_0 ^ u_1` on the upper branch and `x_b = u_1` on the lower
//! one, and `a(x, t)`, `b(x, t)` the per-branch edge distributions:
//!
//! * `f`: `p(u_0, (t_a, t_b)) = sum_{x_b} a(u_0 ^ x_b, t_a) b(x_b, t_b)`
//! * `g`: `p(u_1, (t_a, t_b, u_0)) = a(u_0 ^ u_1, t_a) b(u_1, t_b)`

use super::{EdgeDistribution, SourceSymbol};
use crate::error::{design, Result};

/// Exact check-node LLR combination, stable for large magnitudes.
pub fn boxplus(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        return a.signum() * b.signum() * f64::INFINITY;
    }
    if a.is_infinite() {
        return a.signum() * b;
    }
    if b.is_infinite() {
        return b.signum() * a;
    }
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let (x, y) = (a.abs(), b.abs());
    let mag = x.min(y) + (-(x + y)).exp().ln_1p() - (-(x - y).abs()).exp().ln_1p();
    sign * mag
}

fn check_alphabets(a: &EdgeDistribution, b: &EdgeDistribution) -> Result<usize> {
    if a.size() != b.size() {
        return design(format!("alphabet mismatch: {} vs {}", a.size(), b.size()));
    }
    Ok(a.size())
}

/// Symbols indexed `t_a * |T| + t_b`.
pub fn f_density(a: &EdgeDistribution, b: &EdgeDistribution) -> Result<Vec<SourceSymbol>> {
    let size = check_alphabets(a, b)?;
    let half = size / 2;
    let mut out = Vec::with_capacity(size * size);
    for ta in 0..size {
        for tb in 0..size {
            let (pa, pb) = (a.pmf[ta], b.pmf[tb]);
            out.push(SourceSymbol {
                p: [pa[0] * pb[0] + pa[1] * pb[1], pa[1] * pb[0] + pa[0] * pb[1]],
                llr: boxplus(a.llr[ta], b.llr[tb]),
                positive_on_zero: (ta >= half) == (tb >= half),
            });
        }
    }
    Ok(out)
}

/// Symbols indexed `(t_a * |T| + t_b) * 2 + u_0`.
pub fn g_density(a: &EdgeDistribution, b: &EdgeDistribution) -> Result<Vec<SourceSymbol>> {
    let size = check_alphabets(a, b)?;
    let half = size / 2;
    let mut out = Vec::with_capacity(2 * size * size);
    for ta in 0..size {
        for tb in 0..size {
            let (pa, pb) = (a.pmf[ta], b.pmf[tb]);
            for u in 0..2 {
                let la = if u == 0 { a.llr[ta] } else { -a.llr[ta] };
                out.push(SourceSymbol {
                    p: [pa[u] * pb[0], pa[1 - u] * pb[1]],
                    llr: b.llr[tb] + la,
                    positive_on_zero: tb >= half,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantdesign::{flip, mutual_information};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn h2(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    fn random_symmetric(rng: &mut ChaCha8Rng, size: usize) -> EdgeDistribution {
        let half = size / 2;
        let mut llrs: Vec<f64> = (0..half).map(|_| rng.gen_range(0.1..5.0)).collect();
        llrs.sort_by(f64::total_cmp);
        let masses: Vec<f64> = (0..half).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = masses.iter().sum::<f64>() * 2.0;
        let mut pmf = vec![[0.0; 2]; size];
        for j in 0..half {
            let e = llrs[j].exp();
            let m = masses[j] / total;
            pmf[half + j] = [m * e / (1.0 + e), m / (1.0 + e)];
            pmf[half - 1 - j] = [m / (1.0 + e), m * e / (1.0 + e)];
        }
        EdgeDistribution::from_pmf(pmf)
    }

    #[test]
    fn boxplus_matches_tanh_rule() {
        for &(a, b) in &[
            (1.0, 2.0),
            (-0.3, 4.0),
            (7.0, -7.5),
            (0.0, 3.0),
            (-2.0, -0.1),
        ] {
            let exact = 2.0 * ((a / 2.0f64).tanh() * (b / 2.0f64).tanh()).atanh();
            assert!((boxplus(a, b) - exact).abs() < 1e-12, "{a} {b}");
        }
        assert_eq!(boxplus(800.0, -900.0), -800.0);
        assert_eq!(boxplus(f64::INFINITY, -2.5), -2.5);
    }

    #[test]
    fn f_with_known_lower_bit_replicates_upper_density() {
        let a = EdgeDistribution::bsc(0.2);
        let b = EdgeDistribution::from_pmf(vec![[0.3, 0.0], [0.2, 0.0]]);
        let sym = f_density(&a, &b).unwrap();
        for ta in 0..2 {
            for tb in 0..2 {
                let s = sym[ta * 2 + tb];
                let scale = b.pmf[tb][0];
                assert!((s.p[0] - a.pmf[ta][0] * scale).abs() < 1e-15);
                assert!((s.p[1] - a.pmf[ta][1] * scale).abs() < 1e-15);
                assert!((s.llr - a.llr[ta]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn f_of_two_bscs_is_a_bsc() {
        for eps in [0.01, 0.1, 0.3] {
            let d = EdgeDistribution::bsc(eps);
            let sym = f_density(&d, &d).unwrap();
            let mi = mutual_information(&sym);
            assert!((mi - (1.0 - h2(2.0 * eps * (1.0 - eps)))).abs() < 1e-12);
        }
    }

    #[test]
    fn g_of_two_bscs_is_the_erasure_mixture() {
        for eps in [0.01, 0.1, 0.3] {
            let d = EdgeDistribution::bsc(eps);
            let sym = g_density(&d, &d).unwrap();
            let agree = eps * eps + (1.0 - eps) * (1.0 - eps);
            let expected = agree * (1.0 - h2(eps * eps / agree));
            assert!((mutual_information(&sym) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn outputs_stay_symmetric_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let size = 8;
        let a = random_symmetric(&mut rng, size);
        let b = random_symmetric(&mut rng, size);
        let f = f_density(&a, &b).unwrap();
        let g = g_density(&a, &b).unwrap();
        let total: f64 = f.iter().chain(g.iter()).map(|s| s.p[0] + s.p[1]).sum();
        assert!((total - 2.0).abs() < 1e-12);
        for ta in 0..size {
            for tb in 0..size {
                let s = f[ta * size + tb];
                let m = f[flip(size, ta as u16) as usize * size + tb];
                assert!((s.p[0] - m.p[1]).abs() < 1e-15 && (s.p[1] - m.p[0]).abs() < 1e-15);
                assert!((s.llr + m.llr).abs() < 1e-12);
                assert!(((s.p[0] / s.p[1]).ln() - s.llr).abs() < 1e-9);
                for u in 0..2 {
                    let s = g[(ta * size + tb) * 2 + u];
                    // pmf-derived LLR equals L_b shifted by +-L_a.
                    let shift = if u == 0 { a.llr[ta] } else { -a.llr[ta] };
                    assert!(((s.p[0] / s.p[1]).ln() - (b.llr[tb] + shift)).abs() < 1e-9);
                }
                let s1 = g[(ta * size + tb) * 2 + 1];
                let s0 = g[(flip(size, ta as u16) as usize * size + tb) * 2];
                assert_eq!(s1.p, s0.p);
            }
        }
    }

    #[test]
    fn mismatched_alphabets_are_rejected() {
        let a = EdgeDistribution::bsc(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_symmetric(&mut rng, 4);
        assert!(matches!(f_density(&a, &b), Err(crate::Error::Design(_))));
        assert!(matches!(g_density(&a, &b), Err(crate::Error::Design(_))));
    }
}
