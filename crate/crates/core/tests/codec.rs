mod common;

use av1lab::codec::container::{obu_pack, obu_parse, ObuRecord, ObuType, MAGIC};
use av1lab::codec::io::{parse_raw, parse_y4m, raw_bytes, y4m_bytes};
use av1lab::codec::metrics::{plane_psnr, psnr, Psnr};
use av1lab::codec::tiles::{TileLayout, TileSpec, MAX_TILES};
use av1lab::codec::{
    decode_intra, decode_sequence, decode_tiles_prefilter, encode_intra, encode_intra_report, encode_sequence, EncodeConfig, Partition,
};
use av1lab::frame::{ChromaFormat, Frame, Plane};
use av1lab::grain::GrainParams;
use av1lab::loopfilter::{is_ordered, Stage};
use common::*;
use proptest::prelude::*;

#[test]
fn y4m_fixture_with_two_frames() {
    let mut bytes = b"YUV4MPEG2 W4 H4 F30:1 Ip A1:1 C420jpeg\n".to_vec();
    for f in 0..2u8 {
        bytes.extend_from_slice(b"FRAME\n");
        bytes.extend((0..16).map(|i| i + 16 * f));
        bytes.extend([100 + f; 4]);
        bytes.extend([200 + f; 4]);
    }
    let frames = parse_y4m(&bytes).unwrap();
    assert_eq!(frames.len(), 2);
    for (k, f) in frames.iter().enumerate() {
        assert_eq!((f.width(), f.height(), f.format), (4, 4, ChromaFormat::Yuv420));
        let u = f.plane(1).unwrap();
        assert_eq!((u.width, u.height), (2, 2));
        assert_eq!(f.y.get(3, 3) as usize, 15 + 16 * k);
        assert!(u.data().iter().all(|&v| v as usize == 100 + k));
        assert!(f.plane(2).unwrap().data().iter().all(|&v| v as usize == 200 + k));
    }
    // Truncated payload.
    assert!(parse_y4m(&bytes[..bytes.len() - 1]).is_err());
    assert!(parse_y4m(b"NOTY4M W4 H4\n").is_err());
}

#[test]
fn y4m_and_raw_round_trip() {
    for f in [natural(24, 18, 1), ramp10(32, 16)] {
        let frames = vec![f.clone(), gradient(f.width(), f.height()).clone()];
        let frames: Vec<Frame> = if f.bit_depth() == 10 { vec![f.clone(), f] } else { frames };
        assert_eq!(parse_y4m(&y4m_bytes(&frames).unwrap()).unwrap(), frames);
        let raw = raw_bytes(&frames);
        let (w, h, d) = (frames[0].width(), frames[0].height(), frames[0].bit_depth());
        assert_eq!(parse_raw(&raw, w, h, ChromaFormat::Yuv420, d).unwrap(), frames);
        assert!(parse_raw(&raw[..raw.len() - 1], w, h, ChromaFormat::Yuv420, d).is_err());
    }
    // High depth is stored little-endian.
    let ramp = ramp10(32, 16);
    let raw = raw_bytes(std::slice::from_ref(&ramp));
    assert_eq!(u16::from_le_bytes([raw[2], raw[3]]), ramp.y.get(1, 0));
    let mono = Frame::from_planes(Plane::filled(8, 4, 8, 9).unwrap(), None, None, ChromaFormat::Monochrome).unwrap();
    assert_eq!(parse_y4m(&y4m_bytes(std::slice::from_ref(&mono)).unwrap()).unwrap(), vec![mono]);
}

#[test]
fn container_examples() {
    let recs = vec![ObuRecord::new(ObuType::SequenceHeader, vec![1, 2, 3]), ObuRecord::new(ObuType::Metadata, vec![])];
    let bytes = obu_pack(&recs).unwrap();
    assert!(bytes.starts_with(&MAGIC));
    assert_eq!(obu_parse(&bytes).unwrap(), recs);
    // A size field claiming more than is left.
    let mut bad = bytes.clone();
    bad[MAGIC.len() + 1] = 4;
    assert!(obu_parse(&bad).is_err());
    // An unassigned type code.
    let mut bad = bytes.clone();
    bad[MAGIC.len() + 5] = (9 << 3) | 0b010;
    assert!(obu_parse(&bad).is_err());
    assert!(obu_pack(&recs[1..]).is_err());
    assert!(obu_parse(&bytes[1..]).is_err());
}

fn record() -> impl Strategy<Value = ObuRecord> {
    (0..ObuType::ALL.len(), proptest::collection::vec(any::<u8>(), 0..300)).prop_map(|(t, p)| ObuRecord::new(ObuType::ALL[t], p))
}

proptest! {
    #[test]
    fn container_round_trip(head in proptest::collection::vec(any::<u8>(), 0..40), rest in proptest::collection::vec(record(), 0..12)) {
        let mut recs = vec![ObuRecord::new(ObuType::SequenceHeader, head)];
        recs.extend(rest);
        let bytes = obu_pack(&recs).unwrap();
        prop_assert_eq!(obu_parse(&bytes).unwrap(), recs);
    }
}

#[test]
fn psnr_examples() {
    let a = gradient(32, 32);
    let p = psnr(&a, &a).unwrap();
    assert_eq!(p.combined, Psnr::Lossless);
    assert!(p.combined.db().is_infinite());
    let mut b = a.clone();
    for pl in b.planes_mut() {
        for v in pl.data_mut() {
            *v = (*v).saturating_add(1);
        }
    }
    let p = psnr(&a, &b).unwrap();
    let want = 10.0 * (255.0f64 * 255.0).log10();
    assert!((p.combined.db() - want).abs() < 1e-9 && (want - 48.13).abs() < 0.01);
    // Half-range checkerboard against a flat plane: every error is 128.
    let board = Plane::from_vec(8, 8, 8, (0..64).map(|i| if (i % 8 + i / 8) % 2 == 0 { 128 } else { 0 }).collect()).unwrap();
    let flat = Plane::filled(8, 8, 8, 64).unwrap();
    let db = plane_psnr(&board, &flat).unwrap().db();
    assert!((db - 10.0 * (255.0f64 * 255.0 / 4096.0).log10()).abs() < 1e-9);
    assert!(psnr(&a, &gradient(32, 16)).is_err());
}

#[test]
fn tile_layouts() {
    let l = TileLayout::new(&TileSpec::Uniform { cols: 3, rows: 2 }, 640, 360, 64).unwrap();
    assert_eq!(l.col_starts, vec![0, 3, 6, 10]);
    assert_eq!(l.row_starts, vec![0, 3, 6]);
    assert_eq!(l.rect(5, 640, 360), (384, 192, 640, 360));
    let e = TileLayout::new(&TileSpec::Explicit { widths: vec![1, 9], heights: vec![6] }, 640, 360, 64).unwrap();
    assert_eq!(e.count(), 2);
    assert!(TileLayout::new(&TileSpec::Explicit { widths: vec![1, 8], heights: vec![6] }, 640, 360, 64).is_err());
    // 4096-sample tile width limit.
    assert!(TileLayout::new(&TileSpec::Uniform { cols: 1, rows: 1 }, 4096, 64, 64).is_ok());
    assert!(TileLayout::new(&TileSpec::Uniform { cols: 1, rows: 1 }, 4160, 64, 64).is_err());
    // Tile count limit.
    assert!(TileLayout::new(&TileSpec::Uniform { cols: 32, rows: 16 }, 2048, 1024, 64).unwrap().count() == MAX_TILES);
    assert!(TileLayout::new(&TileSpec::Uniform { cols: 32, rows: 17 }, 2048, 1088, 64).is_err());
}

fn lossless(partition: Partition) -> EncodeConfig {
    EncodeConfig { base_qp: 0, partition, ..Default::default() }
}

#[test]
fn lossless_round_trips() {
    for f in [gradient(40, 24), noise(32, 32, 3), text(48, 40, 5), ramp10(32, 32)] {
        let bytes = encode_intra(&f, &lossless(Partition::Fixed(8))).unwrap();
        assert_eq!(decode_intra(&bytes).unwrap(), f);
    }
    let f = natural(64, 64, 2);
    let bytes = encode_intra(&f, &lossless(Partition::Search { min: 8, max: 32 })).unwrap();
    assert_eq!(decode_intra(&bytes).unwrap(), f);
}

#[test]
fn gray_frame_is_cheap() {
    let g = gray(64, 64, 77);
    let bytes = encode_intra(&g, &lossless(Partition::Fixed(16))).unwrap();
    assert_eq!(decode_intra(&bytes).unwrap(), g);
    let busy = encode_intra(&natural(64, 64, 4), &lossless(Partition::Fixed(16))).unwrap();
    // Headers dominate: about one byte per 16x16 block for all planes.
    assert!(bytes.len() < 200, "{}", bytes.len());
    assert!(bytes.len() * 10 < busy.len());
}

#[test]
fn rate_falls_with_qp() {
    let f = natural(64, 64, 7);
    let size = |qp| encode_intra(&f, &EncodeConfig::with_qp(qp)).unwrap().len();
    let (s50, s100) = (size(50), size(100));
    assert!(s100 < s50, "{s100} >= {s50}");
    let d = decode_intra(&encode_intra(&f, &EncodeConfig::with_qp(100)).unwrap()).unwrap();
    assert!(psnr(&f, &d).unwrap().combined.db().is_finite());
}

#[test]
fn encoder_reference_matches_decoder() {
    let f = natural(80, 48, 9);
    let cfg = EncodeConfig { base_qp: 120, tiles: TileSpec::Uniform { cols: 2, rows: 1 }, partition: Partition::Search { min: 8, max: 32 }, ..Default::default() };
    let report = encode_intra_report(&f, &cfg).unwrap();
    let decoded = decode_sequence(&report.bytes).unwrap();
    assert_eq!(decoded[0].reference, report.frames[0].reference);
    assert!(is_ordered(&report.frames[0].stages));
    // Pure function of the bytes.
    assert_eq!(decode_sequence(&report.bytes).unwrap(), decoded);
}

#[test]
fn tiles_decode_in_any_order() {
    let f = natural(128, 128, 11);
    let cfg = EncodeConfig { base_qp: 90, tiles: TileSpec::Uniform { cols: 2, rows: 2 }, ..Default::default() };
    let bytes = encode_intra(&f, &cfg).unwrap();
    let base = decode_tiles_prefilter(&bytes, &[0, 1, 2, 3]).unwrap();
    for order in [[3, 2, 1, 0], [1, 3, 0, 2], [2, 0, 3, 1]] {
        assert_eq!(decode_tiles_prefilter(&bytes, &order).unwrap(), base);
    }
    assert!(decode_tiles_prefilter(&bytes, &[0, 1, 2]).is_err());
}

#[test]
fn filters_run_in_order_and_help() {
    let f = natural(96, 64, 13);
    let on = encode_intra_report(&f, &EncodeConfig { base_qp: 160, superres_denom: 12, ..Default::default() }).unwrap();
    let stages = &on.frames[0].stages;
    assert!(stages.contains(&Stage::Superres) && is_ordered(stages));
    assert_eq!(decode_intra(&on.bytes).unwrap().width(), 96);
    let plain = EncodeConfig { base_qp: 160, deblock: false, cdef: false, restoration: false, ..Default::default() };
    let filtered = EncodeConfig { base_qp: 160, ..Default::default() };
    let q = |c: &EncodeConfig| psnr(&f, &decode_intra(&encode_intra(&f, c).unwrap()).unwrap()).unwrap().combined.db();
    assert!(q(&filtered) >= q(&plain));
}

#[test]
fn grain_stays_out_of_the_loop() {
    let f = natural(64, 64, 17);
    let mut grain = GrainParams::luma_only(1, vec![0, 0, 0, 64], 200, 5).unwrap();
    grain.scaling_shift = 8;
    let with = decode_sequence(&encode_intra(&f, &EncodeConfig { base_qp: 80, grain: Some(grain), ..Default::default() }).unwrap()).unwrap();
    let without = decode_sequence(&encode_intra(&f, &EncodeConfig::with_qp(80)).unwrap()).unwrap();
    assert_eq!(with[0].reference, without[0].reference);
    assert_ne!(with[0].display, with[0].reference);
}

#[test]
fn sequences_and_config_errors() {
    let frames = vec![gradient(32, 32), noise(32, 32, 1)];
    let bytes = encode_sequence(&frames, &lossless(Partition::Fixed(8))).unwrap();
    let out: Vec<Frame> = decode_sequence(&bytes).unwrap().into_iter().map(|d| d.display).collect();
    assert_eq!(out, frames);
    let f = gradient(32, 32);
    for bad in [
        EncodeConfig { sb_size: 32, ..Default::default() },
        EncodeConfig { partition: Partition::Fixed(4), ..Default::default() },
        EncodeConfig { superres_denom: 20, ..Default::default() },
        EncodeConfig { tiles: TileSpec::Uniform { cols: 2, rows: 1 }, ..Default::default() },
    ] {
        assert!(encode_intra(&f, &bad).is_err());
    }
    assert!(decode_intra(&bytes[..bytes.len() - 3]).is_err() || decode_intra(&bytes[..bytes.len() - 3]).unwrap() != f);
}
