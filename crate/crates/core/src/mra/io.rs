//! Binary layout of a serialized tree (little endian):
//!
//! ```text
//! magic  b"MRAT"          4 bytes
//! d      u8
//! k      u32
//! L      f64
//! eps    f64
//! depth  u8               maximum refinement depth
//! count  u64              number of leaf records
//! count × { level u8, l[0..3] u32 × 3, k^d × f64 }   sorted by NodeKey
//! ```

use super::{basis_for, FunctionTree, MraError, NodeKey};
use std::collections::BTreeMap;
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"MRAT";

impl FunctionTree {
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[self.dim as u8])?;
        w.write_all(&(self.order() as u32).to_le_bytes())?;
        w.write_all(&self.half_width.to_le_bytes())?;
        w.write_all(&self.thresh.to_le_bytes())?;
        w.write_all(&[self.max_depth])?;
        w.write_all(&(self.leaves.len() as u64).to_le_bytes())?;
        for (key, block) in &self.leaves {
            w.write_all(&[key.level])?;
            for l in key.l {
                w.write_all(&l.to_le_bytes())?;
            }
            for v in block {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, MraError> {
        let corrupt = |e: std::io::Error| MraError::Corrupt(e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(corrupt)?;
        if &magic != MAGIC {
            return Err(MraError::Corrupt("bad magic".into()));
        }
        let dim = read_u8(&mut r)? as usize;
        if dim != 1 && dim != 3 {
            return Err(MraError::Corrupt(format!("dimension {dim}")));
        }
        let k = read_u32(&mut r)? as usize;
        if !(2..=30).contains(&k) {
            return Err(MraError::Corrupt(format!("order {k}")));
        }
        let half_width = read_f64(&mut r)?;
        let thresh = read_f64(&mut r)?;
        let max_depth = read_u8(&mut r)?;
        let count = read_u64(&mut r)?;
        let block = k.pow(dim as u32);
        let mut leaves = BTreeMap::new();
        for _ in 0..count {
            let level = read_u8(&mut r)?;
            let mut l = [0u32; 3];
            for v in l.iter_mut() {
                *v = read_u32(&mut r)?;
            }
            if level > 30 || l.iter().any(|&x| x as u64 >= 1u64 << level) {
                return Err(MraError::Corrupt(format!("invalid key ({level}, {l:?})")));
            }
            let mut coeffs = Vec::with_capacity(block);
            for _ in 0..block {
                let v = read_f64(&mut r)?;
                if !v.is_finite() {
                    return Err(MraError::Corrupt("non-finite coefficient".into()));
                }
                coeffs.push(v);
            }
            leaves.insert(NodeKey::new(level, l), coeffs);
        }
        let tree = FunctionTree::from_leaves(dim, basis_for(k), half_width, thresh, max_depth, leaves);
        let width: f64 = tree.leaves.keys().map(|key| 0.5f64.powi(key.level as i32 * dim as i32)).sum();
        if (width - 1.0).abs() > 1e-12 {
            return Err(MraError::Corrupt("leaves do not partition the domain".into()));
        }
        Ok(tree)
    }
}

fn read_bytes<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N], MraError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| MraError::Corrupt(e.to_string()))?;
    Ok(buf)
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8, MraError> {
    Ok(read_bytes::<R, 1>(r)?[0])
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, MraError> {
    Ok(u32::from_le_bytes(read_bytes(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, MraError> {
    Ok(u64::from_le_bytes(read_bytes(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, MraError> {
    Ok(f64::from_le_bytes(read_bytes(r)?))
}

#[cfg(test)]
mod tests {
    use super::super::MraConfig;
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let cfg = MraConfig::new(5, 1e-5, 4.0);
        let f = FunctionTree::project(|x| (-(x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2])).exp(), &cfg, 3).unwrap();
        let bytes = f.to_bytes();
        let g = FunctionTree::read_from(bytes.as_slice()).unwrap();
        assert_eq!(f.leaves(), g.leaves());
        assert_eq!(g.order(), 5);
        assert_eq!(g.thresh(), 1e-5);
    }

    #[test]
    fn truncated_input_is_rejected() {
        let cfg = MraConfig::new(4, 1e-3, 2.0);
        let f = FunctionTree::project(|x| x[0].cos(), &cfg, 1).unwrap();
        let bytes = f.to_bytes();
        assert!(FunctionTree::read_from(&bytes[..bytes.len() - 3]).is_err());
    }
}
