mod common;

use common::{random_bits, random_channel};
use otfs_rake::channel::{apply_channel, DopplerSpreadTable};
use otfs_rake::coding::{
    coded_mrc, encode_frame, turbo_detect, IdentityDecoder, Interleaver, LdpcCode, ParityCheck,
    SoftDecoder, TurboConfig, MAX_DECODER_ITERS,
};
use otfs_rake::detector::{detect, DetectorConfig, InitMode, Refresh, LLR_MAX};
use otfs_rake::frame::{map_to_grid, qam_modulate, FrameConfig, QamAlphabet};
use otfs_rake::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn clean_llrs(cw: &[u8]) -> Vec<f64> {
    cw.iter()
        .map(|&b| if b == 0 { LLR_MAX } else { -LLR_MAX })
        .collect()
}

#[test]
fn shipped_alist_files_round_trip_bit_exactly() {
    for name in ["peg_1024_r05.alist", "peg_4096_r05.alist"] {
        let path = format!("{}/codes/{name}", env!("CARGO_MANIFEST_DIR"));
        let text = std::fs::read_to_string(&path).unwrap();
        let h = ParityCheck::from_alist(&text).unwrap();
        assert_eq!(h.to_alist(), text);
        let code = LdpcCode::from_alist_file(&path).unwrap();
        assert!((code.rate() - 0.5).abs() <= 0.005);
    }
}

#[test]
fn all_zero_info_encodes_to_all_zero() {
    let code = LdpcCode::builtin(1024).unwrap();
    assert!(code.encode(&vec![0; 512]).unwrap().iter().all(|&b| b == 0));
    assert!(matches!(
        code.encode(&[0; 10]),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn random_codewords_satisfy_checks_and_are_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1024, 4096] {
        let code = LdpcCode::builtin(n).unwrap();
        let h = code.parity_check();
        for _ in 0..100 {
            let a = code.encode(&random_bits(&mut rng, n / 2)).unwrap();
            let b = code.encode(&random_bits(&mut rng, n / 2)).unwrap();
            assert!(h.is_codeword(&a));
            let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            assert!(h.is_codeword(&sum));
        }
    }
}

#[test]
fn clean_codeword_decodes_in_one_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let code = LdpcCode::builtin(1024).unwrap();
    let cw = code.encode(&random_bits(&mut rng, 512)).unwrap();
    let out = code.decode(&clean_llrs(&cw), MAX_DECODER_ITERS).unwrap();
    assert!(out.converged);
    assert_eq!(out.iterations, 1);
    assert_eq!(out.bits, cw);
}

#[test]
fn single_confident_error_is_corrected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let code = LdpcCode::builtin(1024).unwrap();
    for _ in 0..20 {
        let cw = code.encode(&random_bits(&mut rng, 512)).unwrap();
        let mut llrs = clean_llrs(&cw);
        let i = rng.random_range(0..1024);
        llrs[i] = -llrs[i];
        let out = code.decode(&llrs, MAX_DECODER_ITERS).unwrap();
        assert!(out.converged);
        assert_eq!(out.bits, cw);
        assert!(code.parity_check().is_codeword(&out.bits));
    }
}

#[test]
fn all_zero_llrs_do_not_converge() {
    let code = LdpcCode::builtin(1024).unwrap();
    let out = code.decode(&vec![0.0; 1024], MAX_DECODER_ITERS).unwrap();
    assert!(!out.converged);
    assert_eq!(out.iterations, MAX_DECODER_ITERS);
    assert!(out.bits.iter().all(|&b| b == 0));
}

#[test]
fn interleaver_round_trips_for_many_seeds() {
    for seed in 0..50 {
        let il = Interleaver::new(7168, seed);
        let data: Vec<u32> = (0..7168).collect();
        assert_eq!(il.deinterleave(&il.interleave(&data)), data);
    }
}

struct Desk {
    cfg: FrameConfig,
    q: QamAlphabet,
    code: LdpcCode,
    il: Interleaver,
}

fn desk() -> Desk {
    let cfg = FrameConfig::new(64, 32, 15e3, 8).unwrap();
    let q = QamAlphabet::new(16).unwrap();
    let il = Interleaver::new(cfg.payload_len() * 4, 77);
    Desk {
        cfg,
        q,
        code: LdpcCode::builtin(1024).unwrap(),
        il,
    }
}

fn det_cfg(sigma: f64, iterations: usize) -> DetectorConfig {
    DetectorConfig {
        iterations,
        init: InitMode::TfMmse,
        noise_std: sigma,
        ..Default::default()
    }
}

#[test]
fn capacity_mismatch_is_rejected() {
    let d = desk();
    let q4 = QamAlphabet::qpsk();
    let il = Interleaver::new(d.cfg.payload_len() * 2, 0);
    assert!(matches!(
        encode_frame(&vec![0; 512 * 3], &d.code, &il, &q4, &d.cfg),
        Err(Error::CapacityMismatch {
            capacity: 3584,
            code_len: 1024
        })
    ));
}

#[test]
fn noiseless_turbo_recovers_info_bits() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = desk();
    let ch = otfs_rake::channel::ChannelModel::new(vec![
        otfs_rake::channel::ChannelPath::new(otfs_rake::C64::new(0.9, 0.1), 0, 1),
        otfs_rake::channel::ChannelPath::new(otfs_rake::C64::new(0.3, -0.2), 2, 0),
    ])
    .normalized();
    let table = DopplerSpreadTable::build(&ch, &d.cfg).unwrap();
    let info = random_bits(&mut rng, 7 * 512);
    let frame = encode_frame(&info, &d.code, &d.il, &d.q, &d.cfg).unwrap();
    let y = apply_channel(&frame.grid, &table, 1e-4, 1).unwrap();
    let tc = TurboConfig {
        n_turbo: 1,
        detector: det_cfg(1e-4, 0),
        refresh: Refresh::Incremental,
    };
    let out = turbo_detect(&y, &table, &d.q, &d.code, &d.il, &tc, None).unwrap();
    assert_eq!(out.info_bits, info);
    assert!(out.converged.iter().all(|&c| c));
}

#[test]
fn one_turbo_iteration_equals_coded_mrc() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = desk();
    for _ in 0..5 {
        let ch = random_channel(&mut rng, &d.cfg, 5, 4);
        let table = DopplerSpreadTable::build(&ch, &d.cfg).unwrap();
        let info = random_bits(&mut rng, 7 * 512);
        let frame = encode_frame(&info, &d.code, &d.il, &d.q, &d.cfg).unwrap();
        let sigma = 0.1;
        let y = apply_channel(&frame.grid, &table, sigma, rng.random()).unwrap();
        let tc = TurboConfig {
            n_turbo: 1,
            detector: det_cfg(sigma, 0),
            refresh: Refresh::Incremental,
        };
        let turbo = turbo_detect(&y, &table, &d.q, &d.code, &d.il, &tc, None).unwrap();
        let coded = coded_mrc(&y, &table, &d.q, &d.code, &d.il, &det_cfg(sigma, 1), None).unwrap();
        assert_eq!(turbo.info_bits, coded.info_bits);
        assert_eq!(turbo.codeword_bits, coded.codeword_bits);
        assert_eq!(turbo.converged, coded.converged);
    }
}

#[test]
fn identity_decoder_reduces_turbo_to_plain_mrc() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = FrameConfig::new(32, 16, 15e3, 4).unwrap();
    let q = QamAlphabet::qpsk();
    let len = cfg.payload_len() * 2;
    let dec = IdentityDecoder { len };
    for refresh in [Refresh::Incremental, Refresh::FromScratch] {
        for _ in 0..5 {
            let ch = random_channel(&mut rng, &cfg, 4, 3);
            let table = DopplerSpreadTable::build(&ch, &cfg).unwrap();
            let bits = random_bits(&mut rng, len);
            let x = map_to_grid(&qam_modulate(&bits, &q).unwrap(), &cfg).unwrap();
            let y = apply_channel(&x, &table, 0.3, rng.random()).unwrap();
            let il = Interleaver::new(len, rng.random());
            for n_turbo in 1..=4 {
                let c = DetectorConfig {
                    iterations: n_turbo,
                    init: InitMode::Zero,
                    noise_std: 0.3,
                    ..Default::default()
                };
                let plain = detect(&y, &table, &q, &c, None).unwrap();
                let tc = TurboConfig {
                    n_turbo,
                    detector: c,
                    refresh,
                };
                let turbo = turbo_detect(&y, &table, &q, &dec, &il, &tc, None).unwrap();
                let plain_bits = otfs_rake::frame::qam_demodulate(&plain.symbols, &q);
                assert_eq!(
                    il.deinterleave(&plain_bits),
                    dec.extract_info(&turbo.info_bits)
                );
                assert_eq!(turbo.counts.iterative, plain.counts.iterative);
            }
        }
    }
}

#[test]
fn incremental_and_from_scratch_feedback_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = desk();
    let ch = random_channel(&mut rng, &d.cfg, 5, 4);
    let table = DopplerSpreadTable::build(&ch, &d.cfg).unwrap();
    let info = random_bits(&mut rng, 7 * 512);
    let frame = encode_frame(&info, &d.code, &d.il, &d.q, &d.cfg).unwrap();
    let y = apply_channel(&frame.grid, &table, 0.12, 9).unwrap();
    let run = |refresh| {
        let tc = TurboConfig {
            n_turbo: 3,
            detector: det_cfg(0.12, 0),
            refresh,
        };
        turbo_detect(&y, &table, &d.q, &d.code, &d.il, &tc, None).unwrap()
    };
    let a = run(Refresh::Incremental);
    let b = run(Refresh::FromScratch);
    assert_eq!(a.info_bits, b.info_bits);
    assert!(b.counts.feedback > a.counts.feedback);
}

#[test]
fn zero_turbo_iterations_rejected() {
    let d = desk();
    let ch = otfs_rake::channel::ChannelModel::identity();
    let table = DopplerSpreadTable::build(&ch, &d.cfg).unwrap();
    let y = otfs_rake::frame::DelayDopplerGrid::received(&d.cfg, vec![Default::default(); 2048])
        .unwrap();
    let tc = TurboConfig {
        n_turbo: 0,
        detector: det_cfg(0.1, 0),
        refresh: Refresh::Incremental,
    };
    assert!(turbo_detect(&y, &table, &d.q, &d.code, &d.il, &tc, None).is_err());
    assert_eq!(SoftDecoder::n(&d.code), 1024);
}
