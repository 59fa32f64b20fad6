use isac_core::channel::{sample_rician_taps, ChannelConfig, ChannelRealization};
use isac_core::operators::dense;
use isac_core::operators::dft_matrix;
use isac_core::signal::inner;
use isac_core::GridConfig;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

/// I0(x)·e^{−x}, power series for small x and the asymptotic expansion beyond.
fn bessel_i0_scaled(x: f64) -> f64 {
    if x < 15.0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let q = x * x / 4.0;
        for k in 1..200 {
            term *= q / (k * k) as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            let m = (2 * k - 1) as f64;
            term *= m * m / (8.0 * x * k as f64);
            sum += term;
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

fn rician_pdf(r: f64, a: f64, sigma2: f64) -> f64 {
    let z = r * a / sigma2;
    r / sigma2 * (-(r - a).powi(2) / (2.0 * sigma2)).exp() * bessel_i0_scaled(z)
}

/// CDF by trapezoidal quadrature on a fine grid, tabulated once.
struct RicianCdf {
    step: f64,
    table: Vec<f64>,
}

impl RicianCdf {
    fn new(a: f64, sigma2: f64) -> Self {
        let upper = a + 12.0 * sigma2.sqrt();
        let n = 200_000;
        let step = upper / n as f64;
        let mut table = vec![0.0; n + 1];
        let mut prev = rician_pdf(0.0, a, sigma2);
        for i in 1..=n {
            let cur = rician_pdf(i as f64 * step, a, sigma2);
            table[i] = table[i - 1] + 0.5 * step * (prev + cur);
            prev = cur;
        }
        Self { step, table }
    }

    fn eval(&self, r: f64) -> f64 {
        let pos = r / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.table.len() {
            return 1.0;
        }
        let t = pos - i as f64;
        self.table[i] * (1.0 - t) + self.table[i + 1] * t
    }
}

fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn tap0_amplitudes(k: f64, n_real: u64) -> Vec<f64> {
    let g = GridConfig::baseline();
    let cfg = ChannelConfig::uniform(4, k, vec![(-30f64).to_radians(), 30f64.to_radians()], 0.0);
    (0..n_real)
        .flat_map(|seed| {
            let ch = sample_rician_taps(&cfg, &g, seed).unwrap();
            ch.taps[0].iter().map(|z| z.norm()).collect::<Vec<_>>()
        })
        .collect()
}

// 1% critical value of the one-sample KS statistic, asymptotic form.
const KS_CRIT_1E4: f64 = 1.628 / 100.0;

#[test]
fn rayleigh_amplitude_when_k_is_zero() {
    let amps = tap0_amplitudes(0.0, 625);
    assert_eq!(amps.len(), 10_000);
    // |CN(0,1)| is Rayleigh with σ² = 1/2: F(r) = 1 − e^{−r²}
    let d = ks_statistic(amps, |r| 1.0 - (-r * r).exp());
    assert!(d < KS_CRIT_1E4, "KS statistic {d}");
}

#[test]
fn rician_amplitude_matches_cdf() {
    for k in [0.0, 1.0, 10.0] {
        let amps = tap0_amplitudes(k, 625);
        let cdf = RicianCdf::new((k / (k + 1.0)).sqrt(), 0.5 / (k + 1.0));
        let d = ks_statistic(amps, |r| cdf.eval(r));
        assert!(d < KS_CRIT_1E4, "K={k}: KS statistic {d}");
    }
}

#[test]
fn quadrature_cdf_reduces_to_rayleigh() {
    let cdf = RicianCdf::new(0.0, 0.5);
    for r in [0.1, 0.5, 1.0, 2.0] {
        assert!((cdf.eval(r) - (1.0 - (-r * r).exp())).abs() < 1e-6);
    }
}

#[test]
fn los_entry_power_is_twice_scatter_at_k1() {
    // Draw order does not depend on K, so the K→∞ draw exposes the LOS term
    // that the K = 1 draw of the same seed contains.
    let g = GridConfig::baseline();
    let angles = vec![(-30f64).to_radians(), 30f64.to_radians()];
    let k1 = ChannelConfig::uniform(4, 1.0, angles.clone(), 0.0);
    let pure = ChannelConfig::uniform(4, 1e12, angles, 0.0);
    let (mut total, mut scatter) = (0.0, 0.0);
    for seed in 0..625 {
        let h = sample_rician_taps(&k1, &g, seed).unwrap();
        let l = sample_rician_taps(&pure, &g, seed).unwrap();
        for (hz, lz) in h.taps[0].iter().zip(l.taps[0].iter()) {
            total += hz.norm_sqr();
            scatter += (hz - lz * 0.5f64.sqrt()).norm_sqr();
        }
    }
    let ratio = total / scatter;
    assert!((ratio / 2.0 - 1.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn effective_matrix_matches_dense_oracle() {
    let g = GridConfig::new(2, 4, 1, 1).unwrap();
    let cfg = ChannelConfig::uniform(2, 1.0, vec![0.2, -0.7], 0.0);
    let ch = sample_rician_taps(&cfg, &g, 3).unwrap();
    let mut h = DMatrix::<Complex64>::zeros(8, 8);
    for (n, b) in ch.freq_blocks.iter().enumerate() {
        h.view_mut((2 * n, 2 * n), (2, 2)).copy_from(b);
    }
    let h_hat = &h * dense::kron(&dft_matrix(&g), &dense::identity(2));
    let s: Vec<_> = (0..8)
        .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
        .collect();
    let r: Vec<_> = (0..8)
        .map(|i| Complex64::new(0.1 * i as f64, -1.0))
        .collect();
    let fwd = &h_hat * DVector::from_column_slice(&s);
    let adj = h_hat.adjoint() * DVector::from_column_slice(&r);
    let got_fwd = ch.effective_apply(&s, &g).unwrap();
    let got_adj = ch.effective_adjoint(&r, &g).unwrap();
    for i in 0..8 {
        assert!((fwd[i] - got_fwd[i]).norm() < 1e-10);
        assert!((adj[i] - got_adj[i]).norm() < 1e-10);
    }
}

#[test]
fn length_mismatch_is_reported() {
    let g = GridConfig::new(2, 4, 1, 1).unwrap();
    let ch = ChannelRealization::identity(&g);
    assert!(ch
        .effective_apply(&[Complex64::new(1.0, 0.0); 7], &g)
        .is_err());
    assert!(ch
        .effective_adjoint(&[Complex64::new(1.0, 0.0); 9], &g)
        .is_err());
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)),
        len,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn same_seed_same_realization(seed in any::<u64>(), k in 0.0f64..20.0) {
        let g = GridConfig::new(3, 8, 2, 1).unwrap();
        let cfg = ChannelConfig::uniform(3, k, vec![0.4, -0.1], 0.0);
        let a = sample_rician_taps(&cfg, &g, seed).unwrap();
        let b = sample_rician_taps(&cfg, &g, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.assembly_error(&g) < 1e-12);
    }

    #[test]
    fn effective_adjoint_identity(seed in any::<u64>(), s in complex_vec(24), r in complex_vec(16)) {
        let g = GridConfig::new(3, 8, 2, 1).unwrap();
        let ch = sample_rician_taps(&ChannelConfig::uniform(2, 1.0, vec![0.4, -0.1], 0.0), &g, seed).unwrap();
        let lhs = inner(&ch.effective_apply(&s, &g).unwrap(), &r);
        let rhs = inner(&s, &ch.effective_adjoint(&r, &g).unwrap());
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }
}
