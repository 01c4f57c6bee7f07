//! Small dense complex matrix helpers shared by the numerical modules.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub type CMat = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn diag(entries: &[Complex64]) -> CMat {
    let n = entries.len();
    let mut m = CMat::zeros(n, n);
    for (k, e) in entries.iter().enumerate() {
        m[(k, k)] = *e;
    }
    m
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn skew_defect(x: &CMat) -> f64 {
    op_norm(&(x + x.adjoint()))
}

pub fn unitary_defect(g: &CMat) -> f64 {
    op_norm(&(g.adjoint() * g - identity(g.nrows())))
}

/// Skew-Hermitian part (X - X^*)/2.
pub fn skew_part(x: &CMat) -> CMat {
    (x - x.adjoint()) * c(0.5, 0.0)
}

/// Frobenius inner product Re tr(A^* B).
pub fn frob_dot(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn frob_norm_sq(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Haar-distributed random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let z = random_gaussian(n, rng);
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
            * (0.5f64).sqrt()
    })
}

/// Random skew-Hermitian matrix with unit Frobenius norm.
pub fn random_skew<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let x = skew_part(&random_gaussian(n, rng));
    let s = frob_norm_sq(&x).sqrt();
    if s == 0.0 {
        x
    } else {
        x / c(s, 0.0)
    }
}

/// Row-major real/imaginary serialization of a complex matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixRepr {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&CMat> for MatrixRepr {
    fn from(m: &CMat) -> Self {
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixRepr {
            rows: m.nrows(),
            cols: m.ncols(),
            re,
            im,
        }
    }
}

impl MatrixRepr {
    pub fn to_matrix(&self) -> Result<CMat, String> {
        let n = self.rows * self.cols;
        if self.re.len() != n || self.im.len() != n {
            return Err(format!(
                "matrix payload has {} / {} entries, expected {}",
                self.re.len(),
                self.im.len(),
                n
            ));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| {
            let k = i * self.cols + j;
            c(self.re[k], self.im[k])
        }))
    }
}

/// `#[serde(with = "crate::linalg::serde_cmat")]`
pub mod serde_cmat {
    use super::{CMat, MatrixRepr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        MatrixRepr::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        repr.to_matrix().map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::linalg::serde_cmat_vec")]`
pub mod serde_cmat_vec {
    use super::{CMat, MatrixRepr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[CMat], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<MatrixRepr> = v.iter().map(MatrixRepr::from).collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
        let reprs = Vec::<MatrixRepr>::deserialize(d)?;
        reprs
            .iter()
            .map(|r| r.to_matrix().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_sample_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            let q = random_unitary(n, &mut rng);
            assert!(unitary_defect(&q) < 1e-12);
        }
    }

    #[test]
    fn repr_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_gaussian(3, &mut rng);
        let back = MatrixRepr::from(&m).to_matrix().unwrap();
        assert_eq!(m, back);
        let json = serde_json::to_string(&MatrixRepr::from(&m)).unwrap();
        let parsed: MatrixRepr = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.to_matrix().unwrap(), m);
    }
}
