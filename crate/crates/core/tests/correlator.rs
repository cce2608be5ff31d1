use g2beam::correlator::{counting_stats, cross_correlation, pair_histogram, HistogramSpec};
use g2beam::montecarlo::substream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn poisson_stream(rng: &mut ChaCha8Rng, rate: f64, duration: f64) -> Vec<f64> {
    let mut t = 0.0;
    let mut out = Vec::new();
    loop {
        t -= (1.0 - rng.random::<f64>()).ln() / rate;
        if t >= duration {
            return out;
        }
        out.push(t);
    }
}

#[test]
fn independent_poisson_streams_are_flat() {
    let spec = HistogramSpec::new(0.05, 1.0).unwrap();
    let (mut inside, mut total) = (0, 0);
    let mut chi_sum = 0.0;
    for trial in 0..100 {
        let mut rng = substream(7, trial);
        let a = poisson_stream(&mut rng, 2.0, 5e3);
        let b = poisson_stream(&mut rng, 3.0, 5e3);
        let cc = cross_correlation(&a, &b, &spec, 5e3).unwrap();
        for k in 0..cc.counts.len() {
            total += 1;
            if (cc.curve.g2[k] - 1.0).abs() < 3.0 * cc.curve.sigma[k] {
                inside += 1;
            }
        }
        chi_sum += cc
            .pearson_chi_square(&vec![1.0; cc.counts.len()])
            .unwrap()
            .reduced();
    }
    assert!(inside as f64 >= 0.99 * total as f64, "{inside}/{total}");
    let mean_chi = chi_sum / 100.0;
    assert!((mean_chi - 1.0).abs() < 0.1, "mean reduced chi2 {mean_chi}");
}

#[test]
fn periodic_streams_give_exact_counts() {
    // a at integers, b offset by 0.25: every lag is k + 0.25.
    let a: Vec<f64> = (0..1000).map(f64::from).collect();
    let b: Vec<f64> = a.iter().map(|t| t + 0.25).collect();
    let spec = HistogramSpec::new(0.5, 3.0).unwrap();
    let h = pair_histogram(&a, &b, &spec);
    assert_eq!(h, vec![1000, 0, 999, 0, 998, 0]);
}

#[test]
fn shared_photons_pair_at_zero_lag() {
    let mut rng = substream(8, 0);
    let a = poisson_stream(&mut rng, 1.0, 1e4);
    let spec = HistogramSpec::new(0.1, 1.0).unwrap();
    let h = pair_histogram(&a, &a, &spec);
    let n = a.len() as u64;
    assert!(h[0] >= n);
    let cc = cross_correlation(&a, &a, &spec, 1e4).unwrap();
    assert!(cc.curve.g2[0] > 5.0);
}

#[test]
fn poisson_counting_is_poissonian() {
    let mut q = Vec::new();
    for trial in 0..50 {
        let mut rng = substream(9, trial);
        let a = poisson_stream(&mut rng, 0.7, 1e5);
        let s = counting_stats(&a, 2.0, 1e5).unwrap();
        assert!(s.q.abs() < 4.0 * s.sigma_q, "q = {} ± {}", s.q, s.sigma_q);
        q.push(s.q);
    }
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    assert!(mean.abs() < 0.01, "{mean}");
}
