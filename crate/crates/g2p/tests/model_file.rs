mod common;

use common::small_model;
use g2p::g2p_core::model::Architecture;
use g2p::model_file::{decode_model, encode_model, load_model, save_model, ModelFileError, VERSION};
use proptest::prelude::*;

fn archs() -> [Architecture; 3] {
    [Architecture::EncoderDecoder, Architecture::Unidirectional, Architecture::Bidirectional]
}

#[test]
fn round_trip_is_exact() {
    for arch in archs() {
        let model = small_model(arch, 3);
        let bytes = encode_model(&model);
        let back = decode_model(&bytes).unwrap();
        assert_eq!(back.config(), model.config());
        assert_eq!(back.letters(), model.letters());
        assert_eq!(back.phonemes(), model.phonemes());
        assert_eq!(back.params, model.params);
        assert_eq!(encode_model(&back), bytes);
    }
}

#[test]
fn save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.g2pm");
    let model = small_model(Architecture::Bidirectional, 5);
    save_model(&model, &path).unwrap();
    assert_eq!(load_model(&path).unwrap().params, model.params);
    assert!(matches!(load_model(&dir.path().join("absent")), Err(ModelFileError::Io(_))));
}

#[test]
fn bad_magic() {
    let mut bytes = encode_model(&small_model(Architecture::Unidirectional, 1));
    bytes[0] = b'X';
    assert!(matches!(decode_model(&bytes), Err(ModelFileError::BadMagic)));
    assert!(matches!(decode_model(b"PK\x03\x04"), Err(ModelFileError::BadMagic)));
}

#[test]
fn future_version_rejected() {
    let mut bytes = encode_model(&small_model(Architecture::Unidirectional, 1));
    bytes[4..8].copy_from_slice(&(VERSION + 1).to_le_bytes());
    assert!(matches!(decode_model(&bytes), Err(ModelFileError::UnsupportedVersion(v)) if v == VERSION + 1));
}

#[test]
fn every_truncation_is_detected() {
    let bytes = encode_model(&small_model(Architecture::EncoderDecoder, 2));
    for n in 0..bytes.len() {
        assert!(decode_model(&bytes[..n]).is_err(), "prefix of {n} bytes accepted");
    }
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(decode_model(&extra), Err(ModelFileError::Malformed(_))));
}

#[test]
fn flipped_weight_fails_checksum() {
    let mut bytes = encode_model(&small_model(Architecture::Bidirectional, 2));
    let n = bytes.len();
    bytes[n - 10] ^= 0x40;
    assert!(matches!(decode_model(&bytes), Err(ModelFileError::Checksum { .. })));
}

#[test]
fn huge_declared_dimensions_do_not_allocate() {
    let mut bytes = encode_model(&small_model(Architecture::Bidirectional, 2));
    // hidden size field
    bytes[17..21].copy_from_slice(&u32::MAX.to_le_bytes());
    assert!(matches!(decode_model(&bytes), Err(ModelFileError::Malformed(_))));
    bytes[17..21].copy_from_slice(&60000u32.to_le_bytes());
    assert!(matches!(decode_model(&bytes), Err(ModelFileError::Truncated)));
}

proptest! {
    #[test]
    fn corruption_never_loads_silently(seed in 0u64..50, pos in any::<prop::sample::Index>(), mask in 1u8..=255) {
        let model = small_model(archs()[(seed % 3) as usize], seed);
        let mut bytes = encode_model(&model);
        let i = pos.index(bytes.len());
        bytes[i] ^= mask;
        prop_assert!(decode_model(&bytes).is_err());
    }

    #[test]
    fn round_trip_any_seed(seed in any::<u64>(), arch in 0usize..3) {
        let model = small_model(archs()[arch], seed);
        let back = decode_model(&encode_model(&model)).unwrap();
        prop_assert_eq!(&back.params, &model.params);
        prop_assert_eq!(back.config(), model.config());
    }
}
