//! Closed-form quantities checked against exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use polyframe::diagnostics::{cond_lower_bound_1d, sample_complexity_bound, NikolskiiSource};
use polyframe::domains::{ball_volume, irwin_hall_cdf};

fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `T_{N-1}(4/len - 1) / N^2` by the three-term recurrence in exact arithmetic.
fn exact_lower_bound(n: usize, len: &BigRational) -> BigRational {
    let x = rational(4, 1) / len - BigRational::one();
    let (mut t0, mut t1) = (BigRational::one(), x.clone());
    let t = if n == 1 {
        t0
    } else {
        for _ in 2..n {
            let t2 = rational(2, 1) * &x * &t1 - &t0;
            t0 = t1;
            t1 = t2;
        }
        t1
    };
    t / rational((n * n) as i64, 1)
}

#[test]
fn chebyshev_lower_bound_matches_exact_values() {
    for (p, q) in [(1, 1), (1, 2), (3, 2), (2, 3), (2, 1)] {
        let len = rational(p, q);
        for n in 1..=25usize {
            let exact = exact_lower_bound(n, &len).to_f64().unwrap();
            let got = cond_lower_bound_1d(n, p as f64 / q as f64).unwrap();
            assert!((got - exact).abs() <= 1e-12 * exact.abs(), "len={p}/{q} N={n}: {got} vs {exact}");
        }
    }
}

#[test]
fn irwin_hall_matches_exact_simplex_volumes() {
    // P(sum of d uniforms on [0,1] <= 1) = 1/d!, i.e. the Corner fraction at the shifted point
    let mut fact = 1u64;
    for d in 1..=8usize {
        fact *= d as u64;
        assert!((irwin_hall_cdf(d, 1.0) - 1.0 / fact as f64).abs() < 1e-14);
    }
    // ball volumes: pi, 4 pi / 3, pi^2 / 2
    let pi = std::f64::consts::PI;
    assert!((ball_volume(2) - pi).abs() < 1e-14);
    assert!((ball_volume(3) - 4.0 * pi / 3.0).abs() < 1e-14);
    assert!((ball_volume(4) - pi * pi / 2.0).abs() < 1e-13);
}

#[test]
fn sample_complexity_examples() {
    // K = N^2 / lambda = 150, log(1000) / (0.5 log 0.5 + 0.5)
    let m = sample_complexity_bound(10, NikolskiiSource::Lambda(2.0 / 3.0), 0.5, 0.01).unwrap();
    assert_eq!(m, 6754);
    let m = sample_complexity_bound(1, NikolskiiSource::Lambda(1.0), 0.5, 0.1).unwrap();
    assert_eq!(m, (10f64.ln() / (0.5 * 0.5f64.ln() + 0.5)).ceil() as u64);
    let m = sample_complexity_bound(4, NikolskiiSource::Squared(16.0), 0.5, 0.1).unwrap();
    let m_lambda = sample_complexity_bound(4, NikolskiiSource::Lambda(1.0), 0.5, 0.1).unwrap();
    assert_eq!(m, m_lambda);
}
