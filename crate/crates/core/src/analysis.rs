//! Trajectory analysis: persistent-crossing detection, peak extraction,
//! log-log power-law fits, and the analytic early-time charge-variance
//! expansion.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Outcome of comparing two observable trajectories whose initial ordering
/// is s1(0) > s2(0).
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingReport {
    /// True when the sign of s1 - s2 flips from its initial sign and stays
    /// flipped for at least `persistence` consecutive samples.
    pub crossed: bool,
    /// Grid value at the earliest persistent flip.
    pub t_qme: Option<f64>,
    /// Persistence window used by the detector.
    pub persistence: usize,
    /// Largest gap-to-combined-stderr ratio inside the first persistent
    /// window; infinite for deterministic series, 0 when not crossed.
    pub significance: f64,
    /// Number of persistent sign flips over the whole series. An odd count
    /// means the late-time ordering is inverted relative to the start.
    pub flip_count: usize,
}

fn window_is_flipped(d: &[f64], start: usize, persistence: usize, sign0: f64) -> bool {
    if start + persistence > d.len() {
        return false;
    }
    let w = &d[start..start + persistence];
    // flipped means "not on the initial side"; require at least one strictly
    // crossed sample so a flat touch does not count
    w.iter().all(|&x| x * sign0 <= 0.0) && w.iter().any(|&x| x * sign0 < 0.0)
}

/// Find the earliest persistent inversion of the initial ordering of two
/// series on a common grid.
pub fn detect_crossing(
    s1: &TimeSeries,
    s2: &TimeSeries,
    persistence: usize,
) -> Result<CrossingReport> {
    if persistence == 0 {
        return Err(Error::InvalidArgument("persistence must be >= 1".into()));
    }
    if s1.times.len() != s2.times.len()
        || s1.times.iter().zip(&s2.times).any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::InvalidArgument(
            "series must share the same time grid".into(),
        ));
    }
    if s1.is_empty() {
        return Err(Error::InvalidArgument("series are empty".into()));
    }
    let d: Vec<f64> = s1.mean.iter().zip(&s2.mean).map(|(a, b)| a - b).collect();
    if d[0] == 0.0 {
        return Err(Error::InvalidArgument(
            "initial values are equal; ordering undefined".into(),
        ));
    }
    if d[0] < 0.0 {
        return Err(Error::InvalidArgument(
            "series must be ordered with s1(0) > s2(0)".into(),
        ));
    }

    // first persistent flip = the crossing
    let mut crossed = false;
    let mut t_qme = None;
    let mut significance = 0.0;
    let mut first_flip = None;
    for k in 1..d.len() {
        if window_is_flipped(&d, k, persistence, 1.0) {
            crossed = true;
            t_qme = Some(s1.times[k]);
            first_flip = Some(k);
            break;
        }
    }
    if let Some(k) = first_flip {
        let window = k..(k + persistence);
        let mut best = 0.0f64;
        for ((&dv, &e1), &e2) in d[window.clone()]
            .iter()
            .zip(&s1.stderr[window.clone()])
            .zip(&s2.stderr[window])
        {
            let gap = dv.abs();
            let se = (e1 * e1 + e2 * e2).sqrt();
            let ratio = if se == 0.0 {
                if gap > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                gap / se
            };
            best = best.max(ratio);
        }
        significance = best;
    }

    // count every persistent sign flip to expose the crossing parity
    let mut flip_count = 0usize;
    let mut current_sign = 1.0f64;
    let mut k = 1;
    while k < d.len() {
        if window_is_flipped(&d, k, persistence, current_sign) {
            flip_count += 1;
            current_sign = -current_sign;
            k += persistence;
        } else {
            k += 1;
        }
    }

    Ok(CrossingReport { crossed, t_qme, persistence, significance, flip_count })
}

/// Global maximum of the series mean; ties resolve to the earliest sample.
pub fn find_peak(s: &TimeSeries) -> Result<(f64, f64)> {
    if s.is_empty() {
        return Err(Error::InvalidArgument("series is empty".into()));
    }
    let mut best = 0usize;
    for k in 1..s.mean.len() {
        if s.mean[k] > s.mean[best] {
            best = k;
        }
    }
    Ok((s.times[best], s.mean[best]))
}

/// Least-squares fit of y = a x^b on log-log axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::InvalidArgument(
            "power-law fit needs strictly positive coordinates".into(),
        ));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "all x values are identical; exponent undetermined".into(),
        ));
    }
    let b = sxy / sxx;
    let a = (my - b * mx).exp();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let pred = a.ln() + b * x;
            (y - pred).powi(2)
        })
        .sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit { a, b, r_squared })
}

/// Closed-form second time derivative of the charge variance at t = 0 for a
/// tilted ferromagnet under the nearest-neighbor chain:
///
///   l (1-gamma)^2 + 3 l (1-gamma) sin^2 cos^2 - 3 delta l (1-gamma)
///   sin^2 cos^2 + delta l (1-gamma) sin^2 - l (1-gamma) sin^2
///
/// Note: the exact commutator value under periodic boundaries carries an
/// additional l (1-gamma)^2 cos^2(theta) on top of this expression; the two
/// agree at theta = pi/2. The validation harness reports both.
pub fn cv_second_derivative_analytic(theta: f64, gamma: f64, delta: f64, num_sites: usize) -> f64 {
    let l = num_sites as f64;
    let s2 = theta.sin().powi(2);
    let c2 = theta.cos().powi(2);
    let g = 1.0 - gamma;
    l * g * g + 3.0 * l * g * s2 * c2 - 3.0 * delta * l * g * s2 * c2 + delta * l * g * s2
        - l * g * s2
}

/// Early-time charge variance prediction
/// sigma^2(t) = l [sin^2 + (t^2/2)(1-gamma)((1-gamma) +
/// (1-delta)(3 sin^2 cos^2 - sin^2))], returned as an absolute variance.
pub fn cv_early_time_prediction(
    t: f64,
    theta: f64,
    gamma: f64,
    delta: f64,
    num_sites: usize,
) -> f64 {
    let l = num_sites as f64;
    let s2 = theta.sin().powi(2);
    let c2 = theta.cos().powi(2);
    let g = 1.0 - gamma;
    l * (s2 + (t * t / 2.0) * g * (g + (1.0 - delta) * (3.0 * s2 * c2 - s2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, Boundary, HamiltonianParams};
    use crate::metrics::{charge_moments, charge_variance};
    use crate::qstate::{tilted_product_state, InitialStatePattern, PatternKind, StateVector};
    use num_complex::Complex64;

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::from_single((0..values.len()).map(|k| k as f64).collect(), values.to_vec())
    }

    #[test]
    fn linear_crossing_is_found() {
        // s1 = 2 - t, s2 = 1 on t = 0..3: ordering flips just after t = 1
        let s1 = series(&[2.0, 1.0, 0.0, -1.0]);
        let s2 = series(&[1.0, 1.0, 1.0, 1.0]);
        let report = detect_crossing(&s1, &s2, 2).unwrap();
        assert!(report.crossed);
        assert_eq!(report.t_qme, Some(1.0));
        assert_eq!(report.flip_count, 1);
        assert!(report.significance.is_infinite());
    }

    #[test]
    fn parallel_series_do_not_cross() {
        let s1 = series(&[2.0, 2.0, 2.0, 2.0]);
        let s2 = series(&[1.0, 1.0, 1.0, 1.0]);
        let report = detect_crossing(&s1, &s2, 2).unwrap();
        assert!(!report.crossed);
        assert_eq!(report.t_qme, None);
        assert_eq!(report.significance, 0.0);
        assert_eq!(report.flip_count, 0);
    }

    #[test]
    fn short_lived_dips_are_ignored() {
        let s1 = series(&[2.0, 1.5, 0.5, 1.5, 2.0, 2.0]);
        let s2 = series(&[1.0; 6]);
        // the single dip below s2 does not persist for 2 samples
        let report = detect_crossing(&s1, &s2, 2).unwrap();
        assert!(!report.crossed);
        let report = detect_crossing(&s1, &s2, 1).unwrap();
        assert!(report.crossed);
        assert_eq!(report.t_qme, Some(2.0));
    }

    #[test]
    fn crossing_ordering_is_validated() {
        let s1 = series(&[1.0, 1.0]);
        let s2 = series(&[1.0, 0.0]);
        assert!(detect_crossing(&s1, &s2, 1).is_err(), "equal initial values");
        let s3 = series(&[0.5, 1.0]);
        assert!(detect_crossing(&s3, &s2, 1).is_err(), "wrong initial order");
        let long = TimeSeries::from_single(vec![0.0, 2.0], vec![2.0, 2.0]);
        assert!(detect_crossing(&long, &s2, 1).is_err(), "grid mismatch");
    }

    #[test]
    fn crossing_is_invariant_under_shift_and_scale() {
        let base1 = [2.0, 1.2, 0.4, 0.3, 0.2, 0.2];
        let base2 = [1.0, 0.9, 0.8, 0.8, 0.8, 0.8];
        let report = detect_crossing(&series(&base1), &series(&base2), 2).unwrap();
        for (shift, scale) in [(5.0, 1.0), (0.0, 3.0), (-2.0, 0.25)] {
            let t1: Vec<f64> = base1.iter().map(|v| v * scale + shift).collect();
            let t2: Vec<f64> = base2.iter().map(|v| v * scale + shift).collect();
            let r = detect_crossing(&series(&t1), &series(&t2), 2).unwrap();
            assert_eq!(r.crossed, report.crossed);
            assert_eq!(r.t_qme, report.t_qme);
            assert_eq!(r.flip_count, report.flip_count);
        }
    }

    #[test]
    fn flip_parity_tracks_final_ordering() {
        // odd number of persistent flips: ends inverted
        let s1 = series(&[2.0, 0.5, 0.5, 2.0, 2.0, 0.5, 0.5, 0.5]);
        let s2 = series(&[1.0; 8]);
        let report = detect_crossing(&s1, &s2, 2).unwrap();
        assert_eq!(report.flip_count, 3);
        assert!(report.crossed);

        // even number: ordering restored
        let s3 = series(&[2.0, 0.5, 0.5, 2.0, 2.0, 2.0, 2.0, 2.0]);
        let report = detect_crossing(&s3, &s2, 2).unwrap();
        assert_eq!(report.flip_count, 2);
    }

    #[test]
    fn stochastic_significance_uses_combined_stderr() {
        let times: Vec<f64> = (0..4).map(|k| k as f64).collect();
        let s1 = TimeSeries {
            times: times.clone(),
            mean: vec![2.0, 0.2, 0.2, 0.2],
            stderr: vec![0.1, 0.3, 0.1, 0.1],
            n_realizations: 10,
        };
        let s2 = TimeSeries {
            times,
            mean: vec![1.0, 1.0, 1.0, 1.0],
            stderr: vec![0.1, 0.4, 0.1, 0.1],
            n_realizations: 10,
        };
        let report = detect_crossing(&s1, &s2, 2).unwrap();
        assert!(report.crossed);
        // window gap/se ratios: 0.8/0.5 = 1.6 at the flip, 0.8/sqrt(0.02) at
        // the next sample; the window maximum is reported
        assert!((report.significance - 0.8 / 0.02f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn peak_extraction() {
        let monotone = series(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(find_peak(&monotone).unwrap(), (3.0, 3.0));

        let hump = series(&[0.0, 2.0, 5.0, 1.0]);
        assert_eq!(find_peak(&hump).unwrap(), (2.0, 5.0));

        // earliest index wins ties
        let flat = series(&[1.0, 4.0, 4.0, 0.0]);
        assert_eq!(find_peak(&flat).unwrap(), (1.0, 4.0));

        let empty = TimeSeries::from_single(vec![], vec![]);
        assert!(find_peak(&empty).is_err());
    }

    #[test]
    fn power_law_fit_recovers_synthetic_models() {
        let xs: Vec<f64> = (1..=10).map(|k| 0.01 * k as f64).collect();
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 2.0 * x.sqrt())).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-10);
        assert!((fit.b - 0.5).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        for (a, b) in [(0.3, -1.7), (5.0, 2.0), (1.0, 0.0)] {
            let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, a * x.powf(b))).collect();
            let fit = fit_power_law(&pts).unwrap();
            assert!((fit.a - a).abs() < 1e-9 * a.max(1.0));
            assert!((fit.b - b).abs() < 1e-10);
        }

        // constant y: exponent 0
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 3.5)).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert_eq!(fit.b, 0.0);
        assert!((fit.a - 3.5).abs() < 1e-12);

        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 2.0), (-1.0, 3.0)]).is_err());
    }

    #[test]
    fn cv_formula_special_cases() {
        for theta in [0.0, 0.4, 1.2] {
            assert_eq!(cv_second_derivative_analytic(theta, 1.0, 0.4, 12), 0.0);
        }
        let l = 12;
        let g = 0.3f64;
        let expected = 12.0 * g * g;
        assert!((cv_second_derivative_analytic(0.0, 1.0 - g, 0.4, l) - expected).abs() < 1e-12);

        // prediction at t = 0 is l sin^2(theta)
        for theta in [0.0, 0.3, 1.5] {
            let v = cv_early_time_prediction(0.0, theta, 0.6, 0.4, 10);
            assert!((v - 10.0 * theta.sin().powi(2)).abs() < 1e-12);
        }
        // theta = 0 growth term
        let t = 0.1;
        let v = cv_early_time_prediction(t, 0.0, 0.6, 0.4, 10);
        assert!((v - 10.0 * (t * t / 2.0) * 0.16).abs() < 1e-12);
    }

    #[test]
    fn prediction_is_consistent_with_second_derivative() {
        // sigma^2(t) = sigma^2(0) + (t^2/2) d2 with the same coefficients
        for theta in [0.1, 0.7, 1.3] {
            for (gamma, delta) in [(0.6, 0.4), (0.8, 1.5)] {
                let l = 12;
                let t = 0.07;
                let direct = cv_early_time_prediction(t, theta, gamma, delta, l);
                let composed = l as f64 * theta.sin().powi(2)
                    + (t * t / 2.0) * cv_second_derivative_analytic(theta, gamma, delta, l);
                assert!((direct - composed).abs() < 1e-12);
            }
        }
    }

    // -- oracles for the early-time expansion --------------------------------

    /// <psi| A |psi> for a real matrix A.
    fn expect(h: &faer::Mat<f64>, psi: &[Complex64]) -> f64 {
        let n = psi.len();
        let mut acc = Complex64::ZERO;
        for a in 0..n {
            let mut row = Complex64::ZERO;
            for b in 0..n {
                row += h[(a, b)] * psi[b];
            }
            acc += psi[a].conj() * row;
        }
        acc.re
    }

    /// d^2/dt^2 sigma_Q^2 at t = 0 via explicit double commutators,
    /// -<[H,[H,Q^2]]> + 2 <Q> <[H,[H,Q]]>, with Q diagonal.
    fn double_commutator_d2(h: &faer::Mat<f64>, psi: &[Complex64], l: usize) -> f64 {
        let n = psi.len();
        let q: Vec<f64> = (0..n).map(|b| l as f64 - 2.0 * b.count_ones() as f64).collect();
        let comm2 = |qdiag: &[f64]| -> faer::Mat<f64> {
            // [H, [H, D]] for diagonal D: first K = HD - DH, then HK - KH
            let mut k = faer::Mat::<f64>::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    k[(a, b)] = h[(a, b)] * (qdiag[b] - qdiag[a]);
                }
            }
            let hk = h * &k;
            let kh = &k * h;
            faer::Mat::<f64>::from_fn(n, n, |a, b| hk[(a, b)] - kh[(a, b)])
        };
        let q2: Vec<f64> = q.iter().map(|x| x * x).collect();
        let hhq2 = comm2(&q2);
        let hhq = comm2(&q);
        let mean_q: f64 = psi
            .iter()
            .enumerate()
            .map(|(b, a)| a.norm_sqr() * q[b])
            .sum();
        -expect(&hhq2, psi) + 2.0 * mean_q * expect(&hhq, psi)
    }

    /// Taylor-series propagator for tiny times, independent of the spectral
    /// evolution path: psi(t) = sum_k (-i H t)^k / k! psi.
    fn taylor_evolve(h: &faer::Mat<f64>, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = psi.len();
        let mut out = psi.to_vec();
        let mut term = psi.to_vec();
        for k in 1..=24 {
            let mut next = vec![Complex64::ZERO; n];
            for a in 0..n {
                let mut s = Complex64::ZERO;
                for b in 0..n {
                    s += h[(a, b)] * term[b];
                }
                next[a] = s * Complex64::new(0.0, -t) / k as f64;
            }
            for (o, v) in out.iter_mut().zip(&next) {
                *o += v;
            }
            term = next;
        }
        out
    }

    fn cv_at(h: &faer::Mat<f64>, psi: &[Complex64], t: f64) -> f64 {
        let evolved = taylor_evolve(h, psi, t);
        let state = StateVector::from_amplitudes(evolved).unwrap();
        charge_variance(&state)
    }

    /// The exact second derivative, measured two independent ways (double
    /// commutator and Richardson-checked central finite differences), equals
    /// the closed form plus l(1-gamma)^2 cos^2(theta) under periodic
    /// boundaries. At theta = pi/2 the closed form itself is exact.
    #[test]
    fn second_derivative_oracle_comparison() {
        for l in [4usize, 6] {
            for (gamma, delta) in [(0.6, 0.4), (0.7, 0.4), (0.8, 1.5)] {
                for theta in [0.0, 0.3, 0.9, std::f64::consts::FRAC_PI_2] {
                    let p = HamiltonianParams {
                        gamma,
                        delta,
                        j2: 0.0,
                        delta2: 0.0,
                        num_sites: l,
                        boundary: Boundary::Periodic,
                    };
                    let h = build_hamiltonian(&p).unwrap();
                    let pattern =
                        InitialStatePattern::new(PatternKind::Ferromagnetic, theta).unwrap();
                    let psi = tilted_product_state(l, &pattern).unwrap();
                    let (q0, _) = charge_moments(&psi);
                    assert!((q0 - l as f64 * theta.cos()).abs() < 1e-10);

                    let dc = double_commutator_d2(&h, psi.amplitudes(), l);

                    // central difference with a Richardson consistency check
                    let fd_at = |hh: f64| -> f64 {
                        (cv_at(&h, psi.amplitudes(), hh) - 2.0 * cv_at(&h, psi.amplitudes(), 0.0)
                            + cv_at(&h, psi.amplitudes(), -hh))
                            / (hh * hh)
                    };
                    let fd1 = fd_at(1e-3);
                    let fd2 = fd_at(5e-4);
                    assert!((fd1 - fd2).abs() < 1e-5, "finite differences inconsistent");
                    assert!((dc - fd2).abs() < 1e-5, "dc = {dc}, fd = {fd2}");

                    let analytic = cv_second_derivative_analytic(theta, gamma, delta, l);
                    let offset = l as f64 * (1.0 - gamma).powi(2) * theta.cos().powi(2);
                    assert!(
                        (dc - (analytic + offset)).abs() < 1e-8,
                        "l={l} gamma={gamma} delta={delta} theta={theta}: \
                         dc = {dc}, analytic = {analytic}, offset = {offset}"
                    );
                    if (theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12 {
                        assert!((dc - analytic).abs() < 1e-8);
                    }
                }
            }
        }
    }
}
