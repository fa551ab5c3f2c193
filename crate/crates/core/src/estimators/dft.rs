//! Discrete Fourier toolkit with the forward `1/N` normalization
//! `F(k) = (1/N) sum_x phi(x/N) e_{-k}(x/N)` and unnormalized inversion
//! `phi(x/N) = sum_k F(k) e_k(x/N)`. Transforms are backed by rustfft.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Fourier coefficients `F(k)` for `k = 0..N-1`.
#[derive(Debug, Clone)]
pub struct SpectralSeries {
    pub coeffs: Vec<Complex64>,
}

impl SpectralSeries {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at signed index `k` (periodic).
    pub fn at(&self, k: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        self.coeffs[k.rem_euclid(n) as usize]
    }
}

pub fn dft_complex(values: &[Complex64]) -> SpectralSeries {
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
    SpectralSeries { coeffs: buf }
}

pub fn dft(values: &[f64]) -> SpectralSeries {
    let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_complex(&complex)
}

pub fn idft(series: &SpectralSeries) -> Vec<Complex64> {
    let n = series.coeffs.len();
    let mut buf = series.coeffs.clone();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Left side of Plancherel for real inputs:
/// `(1/N) sum phi psi  ==  sum_k F_phi(k) F_psi(-k)`.
pub fn plancherel_residual(phi: &[f64], psi: &[f64]) -> f64 {
    let n = phi.len();
    let lhs: f64 = phi.iter().zip(psi).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let fp = dft(phi);
    let fq = dft(psi);
    let rhs: Complex64 = (0..n as i64).map(|k| fp.at(k) * fq.at(-k)).sum();
    (Complex64::new(lhs, 0.0) - rhs).norm()
}

/// Circular convolution `out[x] = sum_j kernel[j] signal[x - offsets[j]]`
/// where the kernel occupies `offsets`. Used for kernel pairings of lattice
/// fields at every site at once.
pub fn circular_correlate(signal: &[f64], kernel: &[(i64, f64)]) -> Vec<f64> {
    let n = signal.len();
    let mut kern = vec![Complex64::default(); n];
    for &(off, w) in kernel {
        kern[off.rem_euclid(n as i64) as usize] += w;
    }
    let mut sig: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let planner = &mut FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    fwd.process(&mut sig);
    fwd.process(&mut kern);
    let mut prod: Vec<Complex64> = sig.iter().zip(&kern).map(|(a, b)| a * b).collect();
    planner.plan_fft_inverse(n).process(&mut prod);
    prod.into_iter().map(|c| c.re / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn constant_maps_to_zero_mode() {
        let s = dft(&vec![2.5; 32]);
        assert!((s.coeffs[0] - Complex64::new(2.5, 0.0)).norm() < 1e-12);
        for k in 1..32 {
            assert!(s.coeffs[k].norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_plancherel_random_vectors() {
        let mut rng = crate::rng::single_rng(3);
        for n in [8usize, 33, 256, 1024] {
            let phi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let psi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let back = idft(&dft(&phi));
            let err = phi
                .iter()
                .zip(&back)
                .map(|(a, b)| (Complex64::new(*a, 0.0) - b).norm())
                .fold(0.0f64, f64::max);
            assert!(err < 1e-10, "round trip err {err} at n={n}");
            assert!(plancherel_residual(&phi, &psi) < 1e-10);
        }
    }

    #[test]
    fn sawtooth_coefficients_converge_like_one_over_n() {
        // phi(u) = u has a jump on the torus; F^N phi(1) approaches
        // hat phi(1) = i/(2 pi) at rate 1/N.
        let target = Complex64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI));
        let mut errs = Vec::new();
        for n in [256usize, 512, 1024] {
            let phi: Vec<f64> = (0..n).map(|x| x as f64 / n as f64).collect();
            errs.push((dft(&phi).at(1) - target).norm());
        }
        assert!(errs[0] / errs[1] > 1.7 && errs[0] / errs[1] < 2.3, "{errs:?}");
        assert!(errs[1] / errs[2] > 1.7 && errs[1] / errs[2] < 2.3, "{errs:?}");
        // a band-limited smooth function is represented exactly
        let n = 64;
        let smooth: Vec<f64> = (0..n)
            .map(|x| (2.0 * std::f64::consts::PI * 3.0 * x as f64 / n as f64).cos())
            .collect();
        let s = dft(&smooth);
        assert!((s.at(3) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((s.at(-3) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!(s.at(5).norm() < 1e-12);
    }

    #[test]
    fn correlate_matches_direct_sum() {
        let mut rng = crate::rng::single_rng(8);
        let n = 40;
        let signal: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let kernel: Vec<(i64, f64)> = vec![(1, 0.5), (2, 0.25), (-3, 0.25)];
        let out = circular_correlate(&signal, &kernel);
        for x in 0..n {
            let want: f64 = kernel
                .iter()
                .map(|&(off, w)| w * signal[(x as i64 - off).rem_euclid(n as i64) as usize])
                .sum();
            assert!((out[x] - want).abs() < 1e-10);
        }
    }
}
