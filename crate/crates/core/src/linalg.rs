//! Complex matrices, the Hermitian eigenproblem, and the signal model
//! `X = Σ^{1/2} G` with `G` standard complex Gaussian.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Wraps row-major `data`; fails if the length is not `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return domain(format!("expected {} entries for a {rows}x{cols} matrix, got {}", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    /// Largest `|A_ij − conj(A_ji)|` relative to the largest entry.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst / scale
    }

    /// `self * self^†`, exactly Hermitian.
    pub fn gram(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            let ri = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut d = 0.0;
            for z in ri {
                d += z.norm_sqr();
            }
            out[(i, i)] = Complex64::new(d, 0.0);
            for j in i + 1..n {
                let rj = &self.data[j * self.cols..(j + 1) * self.cols];
                let mut s = Complex64::new(0.0, 0.0);
                for (a, b) in ri.iter().zip(rj) {
                    s += a * b.conj();
                }
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

/// Eigenvalues (descending) and matching unit eigenvectors (columns of `vectors`).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

const HERMITIAN_TOL: f64 = 1e-10;
const MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi on a copy of `a`. Returns unsorted diagonal and, if asked,
/// the accumulated rotations.
fn jacobi(a: &ComplexMatrix, want_vectors: bool) -> (Vec<f64>, Option<ComplexMatrix>) {
    let n = a.rows;
    let mut m = a.data.clone();
    for i in 0..n {
        m[i * n + i] = Complex64::new(m[i * n + i].re, 0.0);
    }
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n));
    let norm2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    if norm2 == 0.0 {
        return ((0..n).map(|_| 0.0).collect(), v);
    }
    let tol2 = (f64::EPSILON * f64::EPSILON) * norm2 * 1e-2;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q].norm_sqr();
            }
        }
        if off <= tol2 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                if r * r <= tol2 / (n * n) as f64 {
                    m[p * n + q] = Complex64::new(0.0, 0.0);
                    m[q * n + p] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ph_conj = phase.conj();
                // A <- A J with J = diag(1, e^{-iφ}) · real rotation.
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = akp * c - ph_conj * akq * s;
                    m[k * n + q] = akp * s + ph_conj * akq * c;
                }
                // A <- J^† A
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = apk * c - phase * aqk * s;
                    m[q * n + k] = apk * s + phase * aqk * c;
                }
                m[p * n + q] = Complex64::new(0.0, 0.0);
                m[q * n + p] = Complex64::new(0.0, 0.0);
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v.data[k * n + p];
                        let vkq = v.data[k * n + q];
                        v.data[k * n + p] = vkp * c - ph_conj * vkq * s;
                        v.data[k * n + q] = vkp * s + ph_conj * vkq * c;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| m[i * n + i].re).collect(), v)
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if a.rows != a.cols {
        return domain(format!("expected a square matrix, got {}x{}", a.rows, a.cols));
    }
    if a.rows == 0 || a.rows > MAX_DIM {
        return domain(format!("matrix dimension must be in 1..={MAX_DIM}, got {}", a.rows));
    }
    let asym = a.hermitian_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian(asym));
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    Ok(eigenvalues_unchecked(a))
}

/// Eigenvalues of a matrix the caller guarantees to be Hermitian.
pub(crate) fn eigenvalues_unchecked(a: &ComplexMatrix) -> Vec<f64> {
    let (mut vals, _) = jacobi(a, false);
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

/// Full eigendecomposition `A = Q Λ Q^†`, eigenvalues descending.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(a)?;
    let n = a.rows;
    let (vals, vecs) = jacobi(a, true);
    let vecs = vecs.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let values = order.iter().map(|&i| vals[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// `Q f(Λ) Q^†` for a Hermitian eigendecomposition.
fn spectral_map(e: &HermitianEigen, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = e.values.len();
    let fv: Vec<f64> = e.values.iter().map(|&l| f(l)).collect();
    let mut out =
        ComplexMatrix::from_fn(n, n, |r, c| (0..n).map(|k| e.vectors[(r, k)] * fv[k] * e.vectors[(c, k)].conj()).sum());
    // Force exact Hermitian symmetry.
    for r in 0..n {
        out[(r, r)].im = 0.0;
        for c in r + 1..n {
            let z = 0.5 * (out[(r, c)] + out[(c, r)].conj());
            out[(r, c)] = z;
            out[(c, r)] = z.conj();
        }
    }
    out
}

/// K×N matrix of i.i.d. CN(0, 1) entries (real and imaginary parts N(0, ½)).
pub fn sample_standard_complex_gaussian<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(k, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// How per-user channel directions are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    /// Independent Rayleigh vectors, each normalized to unit length.
    #[default]
    Independent,
    /// Rayleigh vectors orthonormalized by Gram-Schmidt (requires P <= K).
    Orthonormal,
}

/// Population covariance `Σ = σ²(I + Σ_i snr_i u_i u_i^†)` and its spectrum.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    k: usize,
    sigma2: f64,
    snrs: Vec<f64>,
    channels: Vec<Vec<Complex64>>,
    sigma_eigs: Vec<f64>,
    sigma: ComplexMatrix,
    sqrt_sigma: ComplexMatrix,
}

impl CovarianceModel {
    /// The H0 model `σ² I`.
    pub fn spherical(k: usize, sigma2: f64) -> Result<Self> {
        Self::from_channels(k, sigma2, Vec::new(), Vec::new())
    }

    /// Assemble a model from linear SNRs and unit channel vectors.
    pub fn from_channels(k: usize, sigma2: f64, snrs: Vec<f64>, channels: Vec<Vec<Complex64>>) -> Result<Self> {
        if k == 0 || k > MAX_DIM {
            return domain(format!("K must be in 1..={MAX_DIM}, got {k}"));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return domain(format!("noise power must be positive, got {sigma2}"));
        }
        if snrs.len() != channels.len() {
            return domain("one channel vector per SNR is required");
        }
        let mut m = ComplexMatrix::identity(k);
        for (&snr, u) in snrs.iter().zip(&channels) {
            if !(snr >= 0.0) || !snr.is_finite() {
                return domain(format!("linear SNR must be finite and >= 0, got {snr}"));
            }
            if u.len() != k {
                return domain(format!("channel vector has length {}, expected {k}", u.len()));
            }
            let norm: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return domain(format!("channel vector must have unit norm, got {norm}"));
            }
            for r in 0..k {
                for c in 0..k {
                    m[(r, c)] += u[r] * u[c].conj() * snr;
                }
            }
        }
        let sigma = m.scale(sigma2);
        let eig = hermitian_eigen(&sigma)?;
        // Σ − σ²I is PSD; clamp rounding below the floor.
        let sigma_eigs = eig.values.iter().map(|&l| l.max(sigma2)).collect();
        let sqrt_sigma = spectral_map(&eig, |l| l.max(0.0).sqrt());
        Ok(Self { k, sigma2, snrs, channels, sigma_eigs, sigma, sqrt_sigma })
    }

    /// A model whose population eigenvalues are `eigs`, realized on the
    /// coordinate axes with noise floor `min(eigs)`.
    pub fn diagonal(eigs: &[f64]) -> Result<Self> {
        if eigs.is_empty() {
            return domain("at least one eigenvalue is required");
        }
        let floor = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        if !(floor > 0.0) {
            return domain("population eigenvalues must be positive");
        }
        let k = eigs.len();
        let mut snrs = Vec::new();
        let mut channels = Vec::new();
        for (i, &e) in eigs.iter().enumerate() {
            let snr = e / floor - 1.0;
            if snr > 0.0 {
                snrs.push(snr);
                let mut u = vec![Complex64::new(0.0, 0.0); k];
                u[i] = Complex64::new(1.0, 0.0);
                channels.push(u);
            }
        }
        Self::from_channels(k, floor, snrs, channels)
    }

    /// Same channels and SNRs with a different noise power.
    pub fn with_noise_power(&self, sigma2: f64) -> Result<Self> {
        Self::from_channels(self.k, sigma2, self.snrs.clone(), self.channels.clone())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn noise_power(&self) -> f64 {
        self.sigma2
    }

    pub fn snrs(&self) -> &[f64] {
        &self.snrs
    }

    pub fn channels(&self) -> &[Vec<Complex64>] {
        &self.channels
    }

    /// Population eigenvalues, descending.
    pub fn sigma_eigs(&self) -> &[f64] {
        &self.sigma_eigs
    }

    pub fn sigma(&self) -> &ComplexMatrix {
        &self.sigma
    }

    pub fn is_spherical(&self) -> bool {
        self.snrs.iter().all(|&s| s == 0.0)
    }

    /// Draw `R = X X^†` for a fresh `X = Σ^{1/2} G`, formed as
    /// `Σ^{1/2} (G G^†) Σ^{1/2}` so the N-length work is a single Gram product.
    pub fn sample_covariance<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> ComplexMatrix {
        let w = sample_standard_complex_gaussian(self.k, n, rng).gram();
        if self.is_spherical() {
            return w.scale(self.sigma2);
        }
        let m = &(&self.sqrt_sigma * &w) * &self.sqrt_sigma;
        ComplexMatrix::from_fn(self.k, self.k, |r, c| {
            if r == c {
                Complex64::new(m[(r, r)].re, 0.0)
            } else {
                (m[(r, c)] + m[(c, r)].conj()) * 0.5
            }
        })
    }

    /// Draw a data matrix `X = Σ^{1/2} G`.
    pub fn sample_data<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> ComplexMatrix {
        let g = sample_standard_complex_gaussian(self.k, n, rng);
        if self.is_spherical() {
            g.scale(self.sigma2.sqrt())
        } else {
            &self.sqrt_sigma * &g
        }
    }
}

/// Draw `snrs_db.len()` channels (fixed for the model's lifetime) and build Σ.
pub fn build_covariance<R: Rng + ?Sized>(
    k: usize,
    sigma2: f64,
    snrs_db: &[f64],
    rng: &mut R,
) -> Result<CovarianceModel> {
    build_covariance_with(k, sigma2, snrs_db, ChannelMode::Independent, rng)
}

pub fn build_covariance_with<R: Rng + ?Sized>(
    k: usize,
    sigma2: f64,
    snrs_db: &[f64],
    mode: ChannelMode,
    rng: &mut R,
) -> Result<CovarianceModel> {
    if !(sigma2 > 0.0) {
        return domain(format!("noise power must be positive, got {sigma2}"));
    }
    if k == 0 {
        return domain("K must be at least 1");
    }
    if mode == ChannelMode::Orthonormal && snrs_db.len() > k {
        return domain(format!("orthonormal channels need P <= K (P = {}, K = {k})", snrs_db.len()));
    }
    let snrs: Vec<f64> = snrs_db.iter().map(|&d| db_to_linear(d)).collect();
    let mut channels: Vec<Vec<Complex64>> = Vec::with_capacity(snrs.len());
    for _ in &snrs {
        let h = sample_standard_complex_gaussian(k, 1, rng);
        let mut u: Vec<Complex64> = h.as_slice().to_vec();
        if mode == ChannelMode::Orthonormal {
            for prev in &channels {
                let proj: Complex64 = prev.iter().zip(&u).map(|(p, x)| p.conj() * x).sum();
                for (x, p) in u.iter_mut().zip(prev) {
                    *x -= proj * p;
                }
            }
        }
        let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut u {
            *z /= norm;
        }
        channels.push(u);
    }
    CovarianceModel::from_channels(k, sigma2, snrs, channels)
}

/// Sample covariance `R = X X^†` for a fresh draw of N snapshots.
pub fn sample_covariance_matrix<R: Rng + ?Sized>(model: &CovarianceModel, n: usize, rng: &mut R) -> ComplexMatrix {
    model.sample_covariance(n, rng)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = stream(seed, Domain::Aux(0), 0);
        let g = sample_standard_complex_gaussian(n, n, &mut rng);
        let mut h = &g + &g.adjoint();
        for i in 0..n {
            h[(i, i)].im = 0.0;
        }
        h
    }

    impl std::ops::Add for &ComplexMatrix {
        type Output = ComplexMatrix;
        fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
            ComplexMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] + rhs[(r, c)])
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = stream(1, Domain::Aux(1), 0);
        let g = sample_standard_complex_gaussian(1000, 1000, &mut rng);
        let n = g.as_slice().len() as f64;
        let power: f64 = g.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        let mean: Complex64 = g.as_slice().iter().sum::<Complex64>() / n;
        let re_var: f64 = g.as_slice().iter().map(|z| z.re * z.re).sum::<f64>() / n;
        assert!((power - 1.0).abs() < 0.005, "{power}");
        assert!(mean.re.abs() < 0.005 && mean.im.abs() < 0.005);
        assert!((re_var - 0.5).abs() < 0.005);
    }

    #[test]
    fn gaussian_is_deterministic() {
        let a = sample_standard_complex_gaussian(3, 5, &mut stream(9, Domain::H0, 2));
        let b = sample_standard_complex_gaussian(3, 5, &mut stream(9, Domain::H0, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn eigen_examples() {
        assert_eq!(hermitian_eigenvalues(&ComplexMatrix::identity(3)).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(
            hermitian_eigenvalues(&ComplexMatrix::from_diagonal(&[5.0, 2.0, 9.0])).unwrap(),
            vec![9.0, 5.0, 2.0]
        );
        let h = random_hermitian(4, 3);
        let vals = hermitian_eigenvalues(&h).unwrap();
        assert!((vals.iter().sum::<f64>() - h.trace().re).abs() < 1e-10);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigen_reconstruction_residual() {
        for &n in &[1usize, 2, 3, 4, 8, 16, 64] {
            let h = random_hermitian(n, n as u64);
            let e = hermitian_eigen(&h).unwrap();
            let back = spectral_map(&e, |l| l);
            let resid: f64 =
                h.as_slice().iter().zip(back.as_slice()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(resid <= 1e-10 * h.frobenius_norm(), "n={n}: {resid}");
            // Q is unitary
            let qq = &e.vectors.adjoint() * &e.vectors;
            for r in 0..n {
                for c in 0..n {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((qq[(r, c)] - Complex64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigen_known_two_by_two() {
        // [[2, i],[−i, 2]] has eigenvalues 3 and 1.
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            vec![
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        )
        .unwrap();
        let v = hermitian_eigenvalues(&m).unwrap();
        assert!((v[0] - 3.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian(_))));
        assert!(hermitian_eigenvalues(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn covariance_examples() {
        let mut rng = stream(5, Domain::Channel, 0);
        let m = build_covariance(4, 1.0, &[], &mut rng).unwrap();
        assert_eq!(m.sigma_eigs(), &[1.0, 1.0, 1.0, 1.0]);
        let m = build_covariance(2, 1.0, &[0.0], &mut rng).unwrap();
        assert!((m.sigma_eigs()[0] - 2.0).abs() < 1e-12 && (m.sigma_eigs()[1] - 1.0).abs() < 1e-12);
        let m = build_covariance(4, 1.0, &[-1.0, -3.0, -10.0], &mut rng).unwrap();
        let want = 4.0 + 10f64.powf(-0.1) + 10f64.powf(-0.3) + 0.1;
        assert!((m.sigma().trace().re - want).abs() < 1e-10);
        assert!((m.sigma_eigs().iter().sum::<f64>() - want).abs() < 1e-10);
        for u in m.channels() {
            let n: f64 = u.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!(build_covariance(4, 0.0, &[1.0], &mut rng).is_err());
    }

    #[test]
    fn covariance_with_noise_power_scales() {
        let mut rng = stream(6, Domain::Channel, 0);
        let m = build_covariance(4, 2.5, &[3.0, -2.0, 0.0, 1.0, 5.0], &mut rng).unwrap();
        assert!(m.sigma_eigs().iter().all(|&e| e >= 2.5 - 1e-9));
        let zero = build_covariance(3, 1.0, &[f64::NEG_INFINITY, f64::NEG_INFINITY], &mut rng).unwrap();
        assert_eq!(zero.sigma_eigs(), CovarianceModel::spherical(3, 1.0).unwrap().sigma_eigs());
    }

    #[test]
    fn orthonormal_channels_give_one_plus_snr() {
        let mut rng = stream(7, Domain::Channel, 0);
        let m = build_covariance_with(4, 1.0, &[3.0, 1.0], ChannelMode::Orthonormal, &mut rng).unwrap();
        let e = m.sigma_eigs();
        assert!((e[0] - (1.0 + db_to_linear(3.0))).abs() < 1e-12);
        assert!((e[1] - (1.0 + db_to_linear(1.0))).abs() < 1e-12);
        assert!((e[2] - 1.0).abs() < 1e-12 && (e[3] - 1.0).abs() < 1e-12);
        assert!(build_covariance_with(2, 1.0, &[0.0; 3], ChannelMode::Orthonormal, &mut rng).is_err());
    }

    #[test]
    fn sample_covariance_mean_matches_sigma() {
        let model = CovarianceModel::spherical(3, 2.0).unwrap();
        let n = 10;
        let trials = 100_000;
        let mut acc = ComplexMatrix::zeros(3, 3);
        for t in 0..trials {
            let r = sample_covariance_matrix(&model, n, &mut stream(11, Domain::H0, t));
            for (a, b) in acc.data.iter_mut().zip(r.as_slice()) {
                *a += b;
            }
        }
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 2.0 } else { 0.0 };
                let got = acc[(r, c)] / (trials as f64 * n as f64);
                assert!((got - Complex64::new(want, 0.0)).norm() < 0.01, "({r},{c}) {got}");
            }
        }
    }

    #[test]
    fn sample_covariance_is_psd_and_rank_limited() {
        let mut rng = stream(12, Domain::Channel, 0);
        let model = build_covariance(2, 1.0, &[0.0], &mut rng).unwrap();
        let r = sample_covariance_matrix(&model, 1, &mut stream(12, Domain::H1, 0));
        let v = hermitian_eigenvalues(&r).unwrap();
        assert!(v[1].abs() < 1e-10 * v[0]);
        let model = build_covariance(6, 1.0, &[2.0, -4.0, 1.0], &mut rng).unwrap();
        for t in 0..200 {
            let r = sample_covariance_matrix(&model, 4, &mut stream(12, Domain::H1, t));
            assert!(r.hermitian_asymmetry() <= 1e-12);
            let v = hermitian_eigenvalues(&r).unwrap();
            assert!(v.iter().all(|&l| l >= -1e-10 * v[0]));
        }
    }
}
