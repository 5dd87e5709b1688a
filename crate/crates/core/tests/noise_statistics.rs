use robust_volterra::noise::{sample_sas, trial_rng, Stream};
use robust_volterra::AlphaStableParams;

const N: usize = 1_000_000;

#[test]
fn empirical_characteristic_function_grid() {
    let mut worst = 0.0f64;
    for (i, &alpha) in [0.8, 1.25, 1.5, 2.0].iter().enumerate() {
        for (j, &gamma) in [1.0 / 15.0, 0.5, 1.0].iter().enumerate() {
            let params = AlphaStableParams::new(alpha, gamma).unwrap();
            let mut rng = trial_rng(77, (3 * i + j) as u64, Stream::Noise);
            let xs = sample_sas(params, &mut rng, N);
            for omega in [0.25, 0.5, 1.0, 2.0] {
                let ecf = xs.iter().map(|x| (omega * x).cos()).sum::<f64>() / N as f64;
                let exact = params.characteristic_function(omega);
                let gap = (ecf - exact).abs();
                worst = worst.max(gap);
                assert!(
                    gap < 0.01,
                    "alpha={alpha} gamma={gamma} omega={omega}: {ecf} vs {exact}"
                );
            }
        }
    }
    assert!(worst < 0.01);
}

#[test]
fn samples_are_sign_symmetric() {
    for alpha in [0.8, 1.25, 2.0] {
        let params = AlphaStableParams::new(alpha, 1.0 / 15.0).unwrap();
        let xs = sample_sas(params, &mut trial_rng(2026, 0, Stream::Noise), N);
        let mean_sign = xs.iter().map(|x| x.signum()).sum::<f64>() / N as f64;
        assert!(
            mean_sign.abs() < 3.0 / (N as f64).sqrt(),
            "alpha={alpha}: {mean_sign}"
        );
    }
}

#[test]
fn gaussian_limit_variance() {
    let params = AlphaStableParams::new(2.0, 0.5).unwrap();
    let xs = sample_sas(params, &mut trial_rng(12, 3, Stream::Noise), N);
    let var = xs.iter().map(|x| x * x).sum::<f64>() / N as f64;
    assert!((var - 1.0).abs() < 0.02, "{var}");
}
