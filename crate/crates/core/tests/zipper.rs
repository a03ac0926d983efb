use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sccode::chain::Rate;
use sccode::zipper::{
    ihdd_window_decode, simulate_bsc_frame, staircase_rate, BchCode, IhddConfig, StaircaseCode, ZipperSpec,
};
use std::collections::HashMap;

mod common;
use common::{patterns, remainder};

fn random_codeword(code: &BchCode, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
    code.encode(&msg).unwrap()
}

fn exhaustive_bounded_distance(m: u32, t: usize) {
    let code = BchCode::new(m, t).unwrap();
    let n = code.n();
    // syndrome table: every pattern of weight <= t has its own remainder
    let mut table: HashMap<Vec<u8>, Vec<usize>> = HashMap::new();
    for w in 0..=t {
        for p in patterns(n, w) {
            let mut e = vec![0u8; n];
            for &i in &p {
                e[i] = 1;
            }
            assert!(table.insert(remainder(&e, code.generator()), p).is_none());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(u64::from(m));
    for _ in 0..4 {
        let c = random_codeword(&code, &mut rng);
        assert!(remainder(&c, code.generator()).iter().all(|&b| b == 0));
        for w in 0..=t {
            for p in patterns(n, w) {
                let mut r = c.clone();
                for &i in &p {
                    r[i] ^= 1;
                }
                let leader = &table[&remainder(&r, code.generator())];
                assert_eq!(leader, &p);
                assert_eq!(code.decode(&r), Ok((c.clone(), w)), "pattern {p:?}");
            }
        }
    }
}

#[test]
fn bch_15_7_corrects_every_pattern_up_to_two() {
    exhaustive_bounded_distance(4, 2);
}

#[test]
fn bch_31_16_corrects_every_pattern_up_to_three() {
    exhaustive_bounded_distance(5, 3);
}

#[test]
fn bch_15_7_three_errors_never_fake_success() {
    let code = BchCode::new(4, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = random_codeword(&code, &mut rng);
    let mut failures = 0;
    for p in patterns(15, 3) {
        let mut r = c.clone();
        for &i in &p {
            r[i] ^= 1;
        }
        match code.decode(&r) {
            Err(_) => failures += 1,
            Ok((w, flips)) => {
                assert!(code.is_codeword(&w));
                assert_ne!(w, c);
                let distance = w.iter().zip(&r).filter(|(a, b)| a != b).count();
                assert_eq!(distance, flips);
                assert!(flips <= 2);
            }
        }
    }
    assert!(failures > 0);
}

#[test]
fn shortened_bch_random_trials() {
    let code = BchCode::new(8, 2).unwrap().shortened(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(255);
    for _ in 0..100_000 {
        let c = random_codeword(&code, &mut rng);
        let weight = rng.random_range(0..=2);
        let mut r = c.clone();
        let mut flipped = Vec::new();
        while flipped.len() < weight {
            let i = rng.random_range(0..code.n());
            if !flipped.contains(&i) {
                flipped.push(i);
                r[i] ^= 1;
            }
        }
        assert_eq!(code.decode(&r), Ok((c, weight)));
    }
}

fn components() -> Vec<BchCode> {
    vec![
        BchCode::new(4, 1).unwrap().shortened(1).unwrap(),
        BchCode::new(5, 1).unwrap().shortened(1).unwrap(),
        BchCode::new(5, 2).unwrap().shortened(1).unwrap(),
        BchCode::new(8, 2).unwrap().shortened(1).unwrap(),
    ]
}

#[test]
fn staircase_equals_zipper_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for component in components() {
        let stair = StaircaseCode::new(component.clone()).unwrap();
        let zipper = ZipperSpec::staircase(component).unwrap();
        let h = stair.half();
        let lengths: Vec<usize> = if h > 100 { vec![1, 2, 7, 20] } else { (1..=20).collect() };
        for blocks in lengths {
            zipper.validate(blocks * h).unwrap();
            let info: Vec<u8> = (0..blocks * stair.info_per_block()).map(|_| rng.random_range(0..2)).collect();
            let flat: Vec<u8> = stair.encode(&info).unwrap().concat();
            assert_eq!(zipper.encode(&info, blocks * h).unwrap(), flat);
        }
    }
}

#[test]
fn staircase_bits_are_protected_twice() {
    let zipper = ZipperSpec::staircase(BchCode::new(5, 1).unwrap().shortened(1).unwrap()).unwrap();
    let h = 15;
    let rows = 6 * h;
    let offsets = zipper.row_offsets(rows);
    let mut copies = vec![0usize; offsets[rows]];
    for i in 0..rows {
        for j in 0..zipper.virtual_len(i) {
            let (ti, tj) = zipper.target(i, j);
            if ti >= 0 {
                copies[offsets[ti as usize] + tj - zipper.virtual_len(ti as usize)] += 1;
            }
        }
    }
    // every real bit outside the last block is copied into exactly one later row
    assert!(copies[..offsets[rows - h]].iter().all(|&c| c == 1));
    assert!(copies[offsets[rows - h]..].iter().all(|&c| c == 0));
}

#[test]
fn staircase_rates_match_formula() {
    for component in components() {
        let stair = StaircaseCode::new(component.clone()).unwrap();
        let zipper = ZipperSpec::staircase(component.clone()).unwrap();
        for blocks in 4..=16 {
            let measured = stair.transcript(blocks).measured_rate().unwrap();
            assert_eq!(measured, staircase_rate(component.n(), component.k()));
            let rows = blocks * stair.half();
            assert_eq!(Rate::new(zipper.info_bits(rows) as u64, zipper.real_bits(rows) as u64), measured);
        }
    }
}

#[test]
fn noiseless_and_single_error_decoding() {
    let zipper = ZipperSpec::staircase(BchCode::new(4, 1).unwrap().shortened(1).unwrap()).unwrap();
    let h = 7;
    let rows = 5 * h;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let info: Vec<u8> = (0..zipper.info_bits(rows)).map(|_| rng.random_range(0..2)).collect();
    let sent = zipper.encode(&info, rows).unwrap();
    let cfg = IhddConfig::staircase(h, 3, 10);
    let clean = ihdd_window_decode(&zipper, &sent, rows, cfg).unwrap();
    assert_eq!(clean.stream, sent);
    assert_eq!(clean.corrections(), 0);
    assert!(clean.windows.iter().all(|w| w.passes == 0));
    for p in 0..sent.len() {
        let mut r = sent.clone();
        r[p] ^= 1;
        let out = ihdd_window_decode(&zipper, &r, rows, cfg).unwrap();
        assert_eq!(out.stream, sent, "flip at {p}");
    }
}

#[test]
fn window_must_cover_the_span() {
    let zipper = ZipperSpec::staircase(BchCode::new(4, 1).unwrap().shortened(1).unwrap()).unwrap();
    let sent = vec![0u8; zipper.real_bits(28)];
    assert!(ihdd_window_decode(&zipper, &sent, 28, IhddConfig::staircase(7, 1, 5)).is_err());
}

#[test]
fn staircase_bsc_waterfall() {
    let component = BchCode::new(8, 2).unwrap().shortened(1).unwrap();
    let zipper = ZipperSpec::staircase(component).unwrap();
    let h = 127;
    let cfg = IhddConfig::staircase(h, 5, 10);
    let mut previous = f64::INFINITY;
    for (i, p) in [5e-3, 4e-3, 3e-3].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let (mut errors, mut raw, mut bits) = (0, 0, 0);
        while bits < 10_000_000 {
            let f = simulate_bsc_frame(&zipper, 20 * h, h, p, cfg, &mut rng).unwrap();
            errors += f.bit_errors;
            raw += f.channel_errors;
            bits += f.info_bits;
        }
        let ber = errors as f64 / bits as f64;
        let input = raw as f64 / bits as f64;
        eprintln!("p={p} input {input:.3e} output {ber:.3e}");
        assert!(ber < input);
        assert!(ber <= previous);
        previous = ber;
    }
}
