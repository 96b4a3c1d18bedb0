use super::MisinfoError;
pub use crate::seed::fnv1a;

pub const DEFAULT_DIM: usize = 256;

/// A finite real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, MisinfoError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MisinfoError::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Text to vector. Implementations must be deterministic.
pub trait Embedder: Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, MisinfoError>;
}

/// Lowercased alphanumeric runs.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}


/// Token counts hashed into `dim` buckets, then L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedBagOfTokens {
    pub dim: usize,
}

impl Default for HashedBagOfTokens {
    fn default() -> Self {
        Self { dim: DEFAULT_DIM }
    }
}

impl HashedBagOfTokens {
    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a(token.as_bytes()) % self.dim as u64) as usize
    }
}

impl Embedder for HashedBagOfTokens {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, MisinfoError> {
        let mut v = vec![0.0; self.dim];
        let mut any = false;
        for t in tokens(text) {
            v[self.bucket(&t)] += 1.0;
            any = true;
        }
        if !any {
            return Err(MisinfoError::EmptyText);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        EmbeddingVector::new(v)
    }
}

/// `u·v / (|u| |v|)`, clamped to [-1, 1].
pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, MisinfoError> {
    if u.dim() != v.dim() {
        return Err(MisinfoError::DimMismatch(u.dim(), v.dim()));
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(MisinfoError::ZeroVector);
    }
    let dot: f64 = u.0.iter().zip(&v.0).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn cosine_fixture() {
        let c = cosine_similarity(&ev(&[1.0, 2.0, 3.0]), &ev(&[4.0, 5.0, 6.0])).unwrap();
        let oracle = 32.0 / (14f64.sqrt() * 77f64.sqrt());
        assert!((c - oracle).abs() < 1e-15);
        assert!((c - 0.974632).abs() < 1e-6);
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(
            cosine_similarity(&ev(&[0.0, 0.0]), &ev(&[1.0, 0.0])),
            Err(MisinfoError::ZeroVector)
        );
        assert_eq!(
            cosine_similarity(&ev(&[1.0]), &ev(&[1.0, 0.0])),
            Err(MisinfoError::DimMismatch(1, 2))
        );
        assert_eq!(EmbeddingVector::new(vec![f64::NAN]), Err(MisinfoError::NonFinite));
    }

    #[test]
    fn empty_text() {
        let e = HashedBagOfTokens::default();
        assert_eq!(e.embed("  ,;! "), Err(MisinfoError::EmptyText));
    }

    #[test]
    fn unit_norm_and_counts() {
        let e = HashedBagOfTokens::default();
        let v = e.embed("vote vote early").unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let (a, b) = (e.bucket("vote"), e.bucket("early"));
        assert_ne!(a, b);
        assert!((v.values()[a] - 2.0 / 5f64.sqrt()).abs() < 1e-15);
    }
}
