//! Property suite for the dispersion engine: independent polynomial
//! evaluation, derivative consistency, affine invariance of the mismatch,
//! and the phase-matching monotonicity in pump power.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfc_core::dispersion::{
    bsfwm_mismatch, classify_sfwm, DispersionProfile, FrequencyQuartet, SfwmClassification,
};
use qfc_core::units::{nm_to_angular, thz_to_angular};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Direct-sum polynomial evaluation, independent of the Horner path.
fn direct_beta(omega0: f64, coeffs: &[f64], omega: f64) -> f64 {
    let d = omega - omega0;
    let mut fact = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for (n, &c) in coeffs.iter().enumerate() {
        if n > 0 {
            fact *= n as f64;
            power *= d;
        }
        sum += c * power / fact;
    }
    sum
}

fn random_profile(r: &mut ChaCha8Rng) -> DispersionProfile {
    let omega0 = thz_to_angular(200.0 + 200.0 * r.random::<f64>());
    let n = 3 + (r.random::<f64>() * 3.0) as usize; // beta_2 .. beta_5
    let scales = [1e7, 1e-8, 1e-26, 1e-41, 1e-55, 1e-70];
    let coeffs: Vec<f64> = (0..=n)
        .map(|k| (r.random::<f64>() - 0.5) * 2.0 * scales[k])
        .collect();
    DispersionProfile::new(omega0, coeffs, (omega0 * 0.3, omega0 * 1.8)).unwrap()
}

#[test]
fn horner_matches_direct_summation() {
    let mut r = rng(31);
    for _ in 0..300 {
        let p = random_profile(&mut r);
        let (lo, hi) = p.window();
        for _ in 0..10 {
            let w = lo + (hi - lo) * r.random::<f64>();
            let got = p.beta(w).unwrap();
            let expect = direct_beta(p.reference_omega(), p.coefficients(), w);
            let scale = expect.abs().max(1e-300);
            assert!((got - expect).abs() / scale <= 1e-12, "{got} vs {expect}");
        }
    }
}

#[test]
fn gvd_matches_centered_finite_difference() {
    // affine terms drop out of the second difference analytically but
    // dominate its floating-point roundoff, so they are zeroed here; they
    // are exercised by the affine-invariance test below
    let mut r = rng(32);
    for _ in 0..100 {
        let p = random_profile(&mut r);
        let mut coeffs = p.coefficients().to_vec();
        coeffs[0] = 0.0;
        coeffs[1] = 0.0;
        let p = DispersionProfile::new(p.reference_omega(), coeffs, p.window()).unwrap();
        let (lo, hi) = p.window();
        let gvd_scale = (0..50)
            .map(|k| {
                p.gvd(lo + (hi - lo) * 0.999 * k as f64 / 49.0)
                    .unwrap()
                    .abs()
            })
            .fold(0.0, f64::max);
        let h = 3e11;
        for _ in 0..5 {
            let w = lo + (hi - lo) * (0.1 + 0.8 * r.random::<f64>());
            let fd = (p.beta(w + h).unwrap() + p.beta(w - h).unwrap() - 2.0 * p.beta(w).unwrap())
                / (h * h);
            let an = p.gvd(w).unwrap();
            let scale = an.abs().max(0.05 * gvd_scale);
            assert!((fd - an).abs() / scale <= 1e-6, "fd {fd} vs analytic {an}");
        }
    }
}

#[test]
fn mismatch_is_invariant_under_affine_terms() {
    let mut r = rng(33);
    for _ in 0..100 {
        let p = random_profile(&mut r);
        let (lo, hi) = p.window();
        // fractions chosen so the implied idler stays inside the window
        let ws = lo + (hi - lo) * (0.2 + 0.1 * r.random::<f64>());
        let wpl = lo + (hi - lo) * (0.05 + 0.1 * r.random::<f64>());
        let wph = lo + (hi - lo) * (0.55 + 0.15 * r.random::<f64>());
        let q = FrequencyQuartet::from_three(ws, wph, wpl).unwrap();
        let base = bsfwm_mismatch(&p, &q).unwrap();

        let mut coeffs = p.coefficients().to_vec();
        coeffs[0] += 5e6;
        coeffs[1] += 3e-9;
        let shifted = DispersionProfile::new(p.reference_omega(), coeffs, p.window()).unwrap();
        let with_affine = bsfwm_mismatch(&shifted, &q).unwrap();

        // tolerance referenced to the non-affine contribution scale
        let curvature_scale: f64 = [ws, wph, q.omega_idler(), wpl]
            .iter()
            .map(|&w| {
                let d = w - p.reference_omega();
                p.coefficients()
                    .iter()
                    .enumerate()
                    .skip(2)
                    .map(|(n, &c)| {
                        (c * d.powi(n as i32)).abs() / (1..=n).fold(1.0, |a, k| a * k as f64)
                    })
                    .sum::<f64>()
            })
            .sum();
        assert!(
            (base - with_affine).abs() <= 1e-9 * curvature_scale.max(1e-12),
            "affine shift changed mismatch: {base} vs {with_affine}"
        );
    }
}

#[test]
fn pure_quadratic_profile_matches_hand_algebra() {
    let mut r = rng(34);
    let w0 = thz_to_angular(300.0);
    let beta2 = 1.7e-26;
    let p = DispersionProfile::new(w0, vec![3e6, 5e-9, beta2], (w0 * 0.2, w0 * 2.0)).unwrap();
    for _ in 0..50 {
        let ws = w0 * (0.5 + 0.3 * r.random::<f64>());
        let wpl = w0 * (0.35 + 0.15 * r.random::<f64>());
        let wph = w0 * (1.1 + 0.3 * r.random::<f64>());
        let q = FrequencyQuartet::from_three(ws, wph, wpl).unwrap();
        let got = bsfwm_mismatch(&p, &q).unwrap();
        let sq = |w: f64| (w - w0) * (w - w0);
        let expect = beta2
            * (sq(q.omega_signal()) + sq(q.omega_pump_hi())
                - sq(q.omega_idler())
                - sq(q.omega_pump_lo()))
            / 2.0;
        let scale = expect.abs().max(1e-12);
        assert!((got - expect).abs() / scale <= 1e-6, "{got} vs {expect}");
    }
}

#[test]
fn symmetric_quartet_beats_asymmetric_near_zero_gvd() {
    // profile with a zero-GVD point: gvd = beta2 + beta3 (w - w0), root at
    // w_z = w0 - beta2/beta3
    let w0 = thz_to_angular(300.0);
    let beta2 = -2e-27;
    let beta3 = 1e-41;
    let p = DispersionProfile::new(w0, vec![0.0, 0.0, beta2, beta3], (w0 - 1.2e15, w0 + 1.2e15))
        .unwrap();
    let wz = w0 - beta2 / beta3;
    let half_span = 4e14;
    let gap = 6e13;
    let quartet_about = |center: f64| {
        FrequencyQuartet::from_three(
            center - half_span + gap,
            center + half_span,
            center - half_span,
        )
        .unwrap()
    };
    let sym = bsfwm_mismatch(&p, &quartet_about(wz)).unwrap().abs();
    let asym = bsfwm_mismatch(&p, &quartet_about(wz + 3e14)).unwrap().abs();
    assert!(sym < asym, "symmetric {sym} vs asymmetric {asym}");
}

#[test]
fn phase_matched_offset_widens_with_pump_power() {
    let w0 = thz_to_angular(300.0);
    let beta2 = -2e-26;
    let p = DispersionProfile::new(w0, vec![0.0, 0.0, beta2], (w0 - 2e15, w0 + 2e15)).unwrap();
    let gamma = 1.2;
    let mut prev = 0.0;
    for k in 1..=10 {
        let power = 0.05 * k as f64;
        match classify_sfwm(&p, w0, power, gamma).unwrap() {
            SfwmClassification::PhaseMatched { delta } => {
                assert!(delta > prev, "offset must widen with power");
                prev = delta;
            }
            other => panic!("expected phase matched at P = {power}, got {other:?}"),
        }
    }
}

#[test]
fn device_style_quartet_hits_the_reported_bands() {
    // pump resonances sit within a fraction of a THz of the nominal
    // 780/1550 nm; a 191.95 THz pump separation reproduces both reported
    // signal/idler pairs of the device
    let sep = thz_to_angular(191.95);
    let wpl = nm_to_angular(1554.24);
    let q = FrequencyQuartet::from_three(nm_to_angular(1283.0), wpl + sep, wpl).unwrap();
    let idler_nm = qfc_core::units::angular_to_nm(q.omega_idler());
    assert!((idler_nm - 704.0).abs() <= 1.0, "idler at {idler_nm} nm");
    let q = FrequencyQuartet::from_three(nm_to_angular(1260.0), wpl + sep, wpl).unwrap();
    let idler_nm = qfc_core::units::angular_to_nm(q.omega_idler());
    assert!((idler_nm - 698.0).abs() <= 2.0, "idler at {idler_nm} nm");
}
