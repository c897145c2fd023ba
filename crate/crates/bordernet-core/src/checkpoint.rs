//! Versioned binary checkpoint container ("BNET" format, version 1).
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic          4 bytes  "BNET"
//! version        u32      currently 1
//! variant        u8       0 vanilla, 1 bordernet, 2 randomnet
//! front_trainable u8      0 or 1
//! seed           u64      trunk initialization seed
//! bank_kind      u8       0 none, 1 oriented, 2 random
//! bank_seed      u64      random-bank seed (0 when absent)
//! normalization  u8       0 raw, 1 L1-normalized (0 when no bank)
//! tensor_count   u32
//! per tensor:    name_len u32, name bytes (UTF-8), rank u32,
//!                dims u32 × rank, data f32 × product(dims)
//! ```
//!
//! Loading rebuilds the network skeleton from the header, then overwrites
//! every parameter value from the tensor table, so `save → load → save` is
//! byte-identical.

use crate::error::{CoreError, Result};
use crate::filter_bank::{BankKind, FilterBank, Normalization};
use crate::models::{Network, NetworkSpec, Variant};
use crate::tensor::Tensor;
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"BNET";
pub const VERSION: u32 = 1;

/// Guard rails against nonsense headers.
const MAX_RANK: u32 = 8;
const MAX_NAME_LEN: u32 = 256;
const MAX_TENSOR_COUNT: u32 = 64;
const MAX_ELEMENTS: u64 = 1 << 24;

fn variant_byte(v: Variant) -> u8 {
    match v {
        Variant::Vanilla => 0,
        Variant::BorderNet => 1,
        Variant::RandomNet => 2,
    }
}

fn variant_from_byte(b: u8) -> Result<Variant> {
    match b {
        0 => Ok(Variant::Vanilla),
        1 => Ok(Variant::BorderNet),
        2 => Ok(Variant::RandomNet),
        other => Err(CoreError::CheckpointFormat(format!(
            "unknown variant tag {other}"
        ))),
    }
}

/// Serialize a network to the checkpoint byte format.
pub fn checkpoint_bytes(net: &Network) -> Vec<u8> {
    let spec = &net.spec;
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(variant_byte(spec.variant));
    out.push(u8::from(spec.front_trainable));
    out.extend_from_slice(&spec.seed.to_le_bytes());
    let (bank_kind, bank_seed, norm) = match &spec.front_bank {
        None => (0u8, 0u64, 0u8),
        Some(bank) => (
            match bank.kind {
                BankKind::Oriented => 1,
                BankKind::Random => 2,
            },
            bank.seed.unwrap_or(0),
            match bank.normalization {
                Normalization::RawOnes => 0,
                Normalization::L1Normalized => 1,
            },
        ),
    };
    out.push(bank_kind);
    out.extend_from_slice(&bank_seed.to_le_bytes());
    out.push(norm);
    out.extend_from_slice(&(net.params.len() as u32).to_le_bytes());
    for p in &net.params {
        let name = p.name.as_bytes();
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name);
        out.extend_from_slice(&(p.value.rank() as u32).to_le_bytes());
        for &d in p.value.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in p.value.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn save_checkpoint(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, checkpoint_bytes(net))
        .map_err(|e| CoreError::io(path.display().to_string(), e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| CoreError::Truncated(format!("checkpoint ended inside {what}")))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let b = self.take(8, what)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }
}

/// Parse checkpoint bytes back into a network.
pub fn network_from_bytes(bytes: &[u8]) -> Result<Network> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(CoreError::BadCheckpointMagic);
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(CoreError::VersionMismatch {
            found: version,
            supported: VERSION,
        });
    }
    let variant = variant_from_byte(r.u8("variant")?)?;
    let front_trainable = r.u8("front_trainable")? != 0;
    let seed = r.u64("seed")?;
    let bank_kind = r.u8("bank_kind")?;
    let bank_seed = r.u64("bank_seed")?;
    let norm_byte = r.u8("normalization")?;
    let tensor_count = r.u32("tensor_count")?;
    if tensor_count > MAX_TENSOR_COUNT {
        return Err(CoreError::CheckpointFormat(format!(
            "implausible tensor count {tensor_count}"
        )));
    }

    let mut tensors: Vec<(String, Tensor)> = Vec::with_capacity(tensor_count as usize);
    for _ in 0..tensor_count {
        let name_len = r.u32("tensor name length")?;
        if name_len > MAX_NAME_LEN {
            return Err(CoreError::CheckpointFormat(format!(
                "tensor name length {name_len} exceeds {MAX_NAME_LEN}"
            )));
        }
        let name = std::str::from_utf8(r.take(name_len as usize, "tensor name")?)
            .map_err(|_| CoreError::CheckpointFormat("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = r.u32("tensor rank")?;
        if rank > MAX_RANK {
            return Err(CoreError::DimensionOverflow(format!(
                "tensor '{name}' declares rank {rank}"
            )));
        }
        let mut dims = Vec::with_capacity(rank as usize);
        let mut elems: u64 = 1;
        for _ in 0..rank {
            let d = r.u32("tensor dimension")?;
            elems = elems.saturating_mul(d as u64);
            dims.push(d as usize);
        }
        if elems > MAX_ELEMENTS {
            return Err(CoreError::DimensionOverflow(format!(
                "tensor '{name}' declares {elems} elements"
            )));
        }
        let raw = r.take(elems as usize * 4, "tensor data")?;
        let data: Vec<f32> = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        tensors.push((name, Tensor::from_vec(&dims, data)?));
    }
    if r.pos != bytes.len() {
        return Err(CoreError::CheckpointFormat(format!(
            "{} trailing bytes after tensor table",
            bytes.len() - r.pos
        )));
    }

    // Rebuild the front bank from its stored kernels.
    let front_bank = match bank_kind {
        0 => None,
        1 | 2 => {
            let kernels: Vec<Tensor> = tensors
                .iter()
                .filter(|(n, _)| n.starts_with("front."))
                .map(|(_, t)| t.clone())
                .collect();
            if kernels.len() != 4 {
                return Err(CoreError::CheckpointFormat(format!(
                    "expected 4 front kernels, found {}",
                    kernels.len()
                )));
            }
            Some(FilterBank {
                kernels,
                kind: if bank_kind == 1 {
                    BankKind::Oriented
                } else {
                    BankKind::Random
                },
                seed: (bank_kind == 2).then_some(bank_seed),
                normalization: match norm_byte {
                    0 => Normalization::RawOnes,
                    1 => Normalization::L1Normalized,
                    other => {
                        return Err(CoreError::CheckpointFormat(format!(
                            "unknown normalization tag {other}"
                        )))
                    }
                },
            })
        }
        other => {
            return Err(CoreError::CheckpointFormat(format!(
                "unknown bank kind {other}"
            )))
        }
    };

    let mut net = Network::from_spec(NetworkSpec {
        variant,
        front_bank,
        front_trainable,
        seed,
    })?;
    if tensors.len() != net.params.len() {
        return Err(CoreError::CheckpointFormat(format!(
            "checkpoint holds {} tensors but variant {variant} has {} parameters",
            tensors.len(),
            net.params.len()
        )));
    }
    for (param, (name, tensor)) in net.params.iter_mut().zip(tensors) {
        if param.name != name {
            return Err(CoreError::CheckpointFormat(format!(
                "unexpected tensor '{name}' where '{}' belongs",
                param.name
            )));
        }
        if param.value.shape() != tensor.shape() {
            return Err(CoreError::CheckpointFormat(format!(
                "tensor '{name}' has shape {:?}, expected {:?}",
                tensor.shape(),
                param.value.shape()
            )));
        }
        param.value = tensor;
    }
    Ok(net)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let bytes =
        std::fs::read(path).map_err(|e| CoreError::io(path.display().to_string(), e))?;
    network_from_bytes(&bytes)
}

/// Load and insist on a particular variant.
pub fn load_checkpoint_as(path: impl AsRef<Path>, expected: Variant) -> Result<Network> {
    let net = load_checkpoint(path)?;
    if net.variant() != expected {
        return Err(CoreError::VariantMismatch {
            expected: expected.label().into(),
            found: net.variant().label().into(),
        });
    }
    Ok(net)
}

/// Human-readable companion file describing a checkpoint.
pub fn sidecar_text(net: &Network) -> String {
    let spec = &net.spec;
    let mut s = String::new();
    s.push_str(&format!("variant: {}\n", spec.variant));
    s.push_str(&format!("seed: {}\n", spec.seed));
    s.push_str(&format!("front_trainable: {}\n", spec.front_trainable));
    match &spec.front_bank {
        None => s.push_str("front_bank: none\n"),
        Some(bank) => {
            s.push_str(&format!(
                "front_bank: {:?} ({:?})\n",
                bank.kind, bank.normalization
            ));
            if let Some(seed) = bank.seed {
                s.push_str(&format!("front_bank_seed: {seed}\n"));
            }
        }
    }
    s.push_str(&format!(
        "stored_parameters: {}\n",
        net.stored_parameter_count()
    ));
    s.push_str(&format!(
        "trainable_parameters: {}\n",
        net.trainable_parameter_count()
    ));
    s.push_str("tensors:\n");
    for p in &net.params {
        s.push_str(&format!(
            "  {} {:?} ({}{})\n",
            p.name,
            p.value.shape(),
            p.value.len(),
            if p.trainable { "" } else { ", frozen" }
        ));
    }
    s
}

pub fn write_sidecar(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, sidecar_text(net))
        .map_err(|e| CoreError::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter_bank::{make_oriented_filter_bank, make_random_filter_bank, normalize_l1};
    use crate::models::{build_bordernet, build_randomnet, build_vanilla};

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let nets = [
            build_vanilla(42),
            build_bordernet(42, normalize_l1(&make_oriented_filter_bank()).unwrap(), false)
                .unwrap(),
            build_randomnet(42, make_random_filter_bank(42), true).unwrap(),
        ];
        for (i, net) in nets.iter().enumerate() {
            let p1 = dir.path().join(format!("a{i}.bnet"));
            let p2 = dir.path().join(format!("b{i}.bnet"));
            save_checkpoint(net, &p1).unwrap();
            let loaded = load_checkpoint(&p1).unwrap();
            save_checkpoint(&loaded, &p2).unwrap();
            assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        }
    }

    #[test]
    fn loaded_network_predicts_identically() {
        let dir = tempfile::tempdir().unwrap();
        let net =
            build_bordernet(3, normalize_l1(&make_oriented_filter_bank()).unwrap(), false)
                .unwrap();
        let path = dir.path().join("n.bnet");
        save_checkpoint(&net, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        let probe = Tensor::filled(&[2, 1, 28, 28], 0.125);
        let a = net.forward(&probe).unwrap();
        let b = loaded.forward(&probe).unwrap();
        assert_eq!(a.data(), b.data());
        assert_eq!(loaded.spec.front_trainable, false);
        assert_eq!(loaded.variant(), Variant::BorderNet);
    }

    #[test]
    fn truncation_by_one_byte_is_detected() {
        let bytes = checkpoint_bytes(&build_vanilla(0));
        assert!(matches!(
            network_from_bytes(&bytes[..bytes.len() - 1]),
            Err(CoreError::Truncated(_))
        ));
    }

    #[test]
    fn bad_magic_is_detected() {
        let mut bytes = checkpoint_bytes(&build_vanilla(0));
        bytes[0] = b'X';
        assert!(matches!(
            network_from_bytes(&bytes),
            Err(CoreError::BadCheckpointMagic)
        ));
    }

    #[test]
    fn future_version_is_refused() {
        let mut bytes = checkpoint_bytes(&build_vanilla(0));
        bytes[4..8].copy_from_slice(&99u32.to_le_bytes());
        assert!(matches!(
            network_from_bytes(&bytes),
            Err(CoreError::VersionMismatch { found: 99, .. })
        ));
    }

    #[test]
    fn variant_expectation_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.bnet");
        save_checkpoint(&build_vanilla(0), &path).unwrap();
        assert!(load_checkpoint_as(&path, Variant::Vanilla).is_ok());
        assert!(matches!(
            load_checkpoint_as(&path, Variant::BorderNet),
            Err(CoreError::VariantMismatch { .. })
        ));
    }

    #[test]
    fn oversized_declared_dimensions_are_refused() {
        let net = build_vanilla(0);
        let mut bytes = checkpoint_bytes(&net);
        // First tensor header sits right after the 32-byte fixed header:
        // name_len(4) + "conv1.weight"(12) + rank(4), then dims.
        let dims_at = 32 + 4 + 12 + 4;
        bytes[dims_at..dims_at + 4].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(
            network_from_bytes(&bytes),
            Err(CoreError::DimensionOverflow(_)) | Err(CoreError::Truncated(_))
        ));
    }

    #[test]
    fn trailing_garbage_is_refused() {
        let mut bytes = checkpoint_bytes(&build_vanilla(0));
        bytes.push(0);
        assert!(matches!(
            network_from_bytes(&bytes),
            Err(CoreError::CheckpointFormat(_))
        ));
    }

    #[test]
    fn sidecar_mentions_the_essentials() {
        let net = build_randomnet(9, make_random_filter_bank(9), false).unwrap();
        let text = sidecar_text(&net);
        assert!(text.contains("variant: randomnet"));
        assert!(text.contains("seed: 9"));
        assert!(text.contains("stored_parameters: 61902"));
        assert!(text.contains("front.0"));
        assert!(text.contains("frozen"));
    }

    #[test]
    fn random_bank_seed_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.bnet");
        let net = build_randomnet(1, make_random_filter_bank(77), false).unwrap();
        save_checkpoint(&net, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.spec.front_bank.as_ref().unwrap().seed, Some(77));
    }
}
