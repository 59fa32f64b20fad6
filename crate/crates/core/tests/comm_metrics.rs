use isac_core::channel::{sample_rician_taps, ChannelConfig, ChannelRealization};
use isac_core::comm_metrics::{
    empirical_ser, mui_energy, noise_std_from_esn0_db, papr, papr_time, random_freq, sum_rate,
    ConstellationSymbols,
};
use isac_core::{GridConfig, SamplingMode};
use num_complex::Complex64;
use proptest::prelude::*;

fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn qpsk_ser(esn0: f64) -> f64 {
    let q = q_function(esn0.sqrt());
    2.0 * q - q * q
}

fn channel(grid: &GridConfig, seed: u64) -> ChannelRealization {
    sample_rician_taps(
        &ChannelConfig::uniform(4, 1.0, vec![-0.5, 0.5], 0.0),
        grid,
        seed,
    )
    .unwrap()
}

#[test]
fn ser_matches_awgn_oracle_at_10db() {
    // H = I and x = s_D: y = s_D + z, so the link is plain AWGN.
    let grid = GridConfig::new(4, 50, 4, 1).unwrap();
    let h = ChannelRealization::identity(&grid);
    let sd = ConstellationSymbols::random(50, 4, 21);
    let n_trials = 500; // 500 × 200 = 1e5 symbols
    let ser = empirical_ser(&h, &sd.data, &sd, noise_std_from_esn0_db(10.0), n_trials, 3).unwrap();
    let p = qpsk_ser(10.0);
    let sigma = (p * (1.0 - p) / 1e5).sqrt();
    assert!((ser - p).abs() < 3.0 * sigma, "SER {ser} vs {p} ± {sigma}");
}

#[test]
fn ser_of_silent_transmitter_is_three_quarters() {
    let grid = GridConfig::new(2, 40, 4, 1).unwrap();
    let h = channel(&grid, 1);
    let sd = ConstellationSymbols::random(40, 2, 2);
    let zero = vec![Complex64::new(0.0, 0.0); grid.freq_len()];
    let n = 200 * 80;
    let ser = empirical_ser(&h, &zero, &sd, 1.0, 200, 5).unwrap();
    let sigma = (0.75f64 * 0.25 / n as f64).sqrt();
    assert!((ser - 0.75).abs() < 3.0 * sigma, "SER {ser}");
}

#[test]
fn ser_non_increasing_as_noise_drops() {
    // Paired seeds: every Es/N0 point scales the same noise draws.
    let grid = GridConfig::new(2, 40, 4, 1).unwrap();
    let id = ChannelRealization::identity(&grid);
    let sd = ConstellationSymbols::random(40, 2, 7);
    let mut prev = 1.0;
    for esn0 in [-5.0, 0.0, 3.0, 6.0, 9.0, 12.0] {
        let ser = empirical_ser(&id, &sd.data, &sd, noise_std_from_esn0_db(esn0), 100, 11).unwrap();
        assert!(ser <= prev, "SER rose to {ser} at {esn0} dB");
        prev = ser;
    }
}

#[test]
fn mui_matches_blockwise_sum() {
    let grid = GridConfig::new(3, 8, 2, 1).unwrap();
    let h = channel(&grid, 4);
    let sd = ConstellationSymbols::random(8, 2, 4);
    let x = random_freq(&grid, 8);
    let mut expect = 0.0;
    for (n, hn) in h.freq_blocks.iter().enumerate() {
        for u in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..3 {
                acc += hn[(u, c)] * x[n * 3 + c];
            }
            expect += (acc - sd.data[n * 2 + u]).norm_sqr();
        }
    }
    let got = mui_energy(&h, &x, &sd).unwrap();
    assert!((got - expect).abs() < 1e-12 * expect);
}

#[test]
fn rate_grows_as_residual_shrinks() {
    let grid = GridConfig::new(2, 8, 2, 1).unwrap();
    let h = ChannelRealization::identity(&grid);
    let sd = ConstellationSymbols::random(8, 2, 6);
    let x0 = random_freq(&grid, 2);
    let mut prev = f64::NEG_INFINITY;
    // x_t = s_D + t·(x0 − s_D): every residual entry shrinks as t → 0
    for t in [1.0, 0.7, 0.4, 0.2, 0.0] {
        let x: Vec<_> = sd
            .data
            .iter()
            .zip(&x0)
            .map(|(s, e)| s + (e - s) * t)
            .collect();
        let r = sum_rate(&h, &x, &sd, 0.3).unwrap();
        assert!(r > prev);
        prev = r;
    }
}

#[test]
fn oversampled_papr_never_below_nyquist() {
    let grid = GridConfig::baseline();
    for seed in 0..100 {
        let x = random_freq(&grid, seed);
        let a = papr(&x, &grid, SamplingMode::Nyquist).unwrap();
        let b = papr(&x, &grid, SamplingMode::Oversampled).unwrap();
        for (p, q) in a.per_antenna.iter().zip(&b.per_antenna) {
            assert!(*q >= p - 1e-9);
        }
    }
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)),
        len,
    )
}

proptest! {
    #[test]
    fn papr_at_least_one_and_scale_free(x in complex_vec(32), c in 0.01f64..50.0, ph in 0.0f64..6.28) {
        let grid = GridConfig::new(4, 8, 2, 2).unwrap();
        for mode in [SamplingMode::Nyquist, SamplingMode::Oversampled] {
            if let Ok(a) = papr(&x, &grid, mode) {
                let xs: Vec<_> = x.iter().map(|z| z * Complex64::from_polar(c, ph)).collect();
                let b = papr(&xs, &grid, mode).unwrap();
                for (p, q) in a.per_antenna.iter().zip(&b.per_antenna) {
                    prop_assert!(*p >= 1.0 - 1e-12);
                    prop_assert!((p - q).abs() <= 1e-12 * p);
                }
            }
        }
    }

    #[test]
    fn constant_modulus_is_the_papr_floor(phases in prop::collection::vec(0.0f64..6.28, 24), amp in 0.1f64..3.0) {
        let s: Vec<_> = phases.iter().map(|p| Complex64::from_polar(amp, *p)).collect();
        let r = papr_time(&s, 3).unwrap();
        prop_assert!(r.per_antenna.iter().all(|p| (p - 1.0).abs() < 1e-12));
        let mut bumped = s.clone();
        bumped[4] *= 1.5;
        let r = papr_time(&bumped, 3).unwrap();
        prop_assert!(r.per_antenna[1] > 1.0 + 1e-6);
    }
}
