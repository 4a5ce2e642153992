//! Binary codebook file.
//!
//! ```text
//! "VLAWECB1"          8-byte magic
//! k, d, seed, iters   u64 little endian
//! inertia             f64 little endian
//! centroids           k * d f64 little endian, row-major
//! ```

use std::path::Path;

use vlawe_core::Codebook;

use crate::binio::{read_file, write_file, Reader, Writer};
use crate::error::Result;

const MAGIC: &[u8; 8] = b"VLAWECB1";

pub fn encode_codebook(cb: &Codebook) -> Vec<u8> {
    let mut w = Writer::new(MAGIC);
    w.u64(cb.k() as u64);
    w.u64(cb.dim() as u64);
    w.u64(cb.seed);
    w.u64(cb.iterations_run as u64);
    w.f64(cb.inertia);
    w.f64s(cb.centroids());
    w.0
}

pub fn decode_codebook(bytes: &[u8], path: &Path) -> Result<Codebook> {
    let mut r = Reader::new(bytes, path, MAGIC, "codebook")?;
    let k = r.usize("k")?;
    let d = r.usize("dimension")?;
    let seed = r.u64("seed")?;
    let iterations = r.usize("iteration count")?;
    let inertia = r.f64("inertia")?;
    let n = k
        .checked_mul(d)
        .ok_or_else(|| crate::error::VlaweError::format(path, "k * d overflows"))?;
    let centroids = r.f64s(n, "centroid matrix")?;
    r.finish()?;
    Ok(Codebook::from_parts(
        k, d, centroids, inertia, iterations, seed,
    )?)
}

pub fn save_codebook(cb: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_codebook(cb))
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    let path = path.as_ref();
    decode_codebook(&read_file(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::VlaweError;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            k in 1usize..5,
            d in 1usize..6,
            seed in any::<u64>(),
            raw in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 30),
            inertia in any::<f64>(),
        ) {
            let cb = Codebook::from_parts(k, d, raw[..k * d].to_vec(), inertia, 7, seed).unwrap();
            let back = decode_codebook(&encode_codebook(&cb), Path::new("x")).unwrap();
            prop_assert_eq!(back.k(), k);
            prop_assert_eq!(back.seed, seed);
            prop_assert_eq!(back.inertia.to_bits(), inertia.to_bits());
            let a: Vec<u64> = cb.centroids().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = back.centroids().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn file_round_trip_keeps_inertia() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cb.bin");
        let cb = Codebook::from_parts(2, 2, vec![0.5, -1.0, 3.25, 1e-300], 12.75, 4, 99).unwrap();
        save_codebook(&cb, &path).unwrap();
        assert_eq!(load_codebook(&path).unwrap(), cb);
    }

    #[test]
    fn truncated_matrix_is_rejected() {
        let cb = Codebook::from_parts(2, 3, vec![1.0; 6], 0.0, 1, 1).unwrap();
        let mut bytes = encode_codebook(&cb);
        bytes.truncate(bytes.len() - 8);
        match decode_codebook(&bytes, Path::new("cb")) {
            Err(VlaweError::Format { message, .. }) => {
                assert!(message.contains("expected 6 values, found 5"), "{message}")
            }
            other => panic!("{other:?}"),
        }
        assert!(decode_codebook(b"garbage!", Path::new("cb")).is_err());
        let mut extra = encode_codebook(&cb);
        extra.push(0);
        assert!(decode_codebook(&extra, Path::new("cb")).is_err());
    }
}
