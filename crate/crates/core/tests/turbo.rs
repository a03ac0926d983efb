use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sccode::chain::{ChainSpec, Rate};
use sccode::channels::LLR_SATURATION as S;
use sccode::ldpc::WindowConfig;
use sccode::turbo::families::{GROUP_INNER, GROUP_LOWER, GROUP_OUTER, GROUP_PARITY, GROUP_UPPER};
use sccode::turbo::{
    bcjr, gscpcc, gscpcc_rate, hscbcc, hscbcc_rate, scscc, scscc_rate, window_decode, ConvCode,
    GscPccConfig, HscBccConfig, RepetitionSpec, ScSccConfig, TurboGraph,
};

mod common;
use common::brute_force;

#[test]
fn bcjr_matches_exhaustive_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for (spec, num, den) in [("[1,5/7]", 0b101, 0b111), ("[1,15/13]", 0b1011, 0b1101)] {
        let code = ConvCode::parse(spec).unwrap();
        for k in 1..=12 {
            for _ in 0..3 {
                let sys: Vec<f64> = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
                let par: Vec<f64> = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
                let out = bcjr(&code, &sys, &par);
                let (u, p) = brute_force(k, num, den, &sys, &par);
                for i in 0..k {
                    worst = worst.max((out.inputs[i] - u[i]).abs());
                    worst = worst.max((out.parity[i] - p[i]).abs());
                }
            }
        }
    }
    assert!(worst < 1e-9, "max deviation {worst}");
}

fn table_code() -> ConvCode {
    ConvCode::parse("[1,5/7]").unwrap()
}

fn gsc(l: usize, m: usize, block: usize, q: u64, ratio: Rate, seed: u64) -> TurboGraph {
    gscpcc(&GscPccConfig {
        code: table_code(),
        repetition: RepetitionSpec::new(q, ratio).unwrap(),
        chain: ChainSpec::new(l, m).unwrap(),
        block,
        seed,
    })
    .unwrap()
}

fn scc(l: usize, m: usize, block: usize, seed: u64) -> TurboGraph {
    scscc(&ScSccConfig {
        outer: table_code(),
        inner: table_code(),
        chain: ChainSpec::new(l, m).unwrap(),
        block,
        seed,
    })
    .unwrap()
}

fn hsc(l: usize, sigma: usize, block: usize, seed: u64) -> TurboGraph {
    hscbcc(&HscBccConfig {
        code: ConvCode::parse("[1,0,5/7;0,1,3/7]").unwrap(),
        length: l,
        sigma,
        block,
        seed,
    })
    .unwrap()
}

#[test]
fn measured_rates_equal_closed_forms() {
    for l in 4..=16 {
        for m in 1..=2 {
            let chain = ChainSpec::new(l, m).unwrap();
            for ratio in [Rate::new(1, 3), Rate::new(1, 2)] {
                let rep = RepetitionSpec::new(2, ratio).unwrap();
                let g = gsc(l, m, 12, 2, ratio, 1);
                assert_eq!(g.transcript().measured_rate().unwrap(), gscpcc_rate(&rep, chain));
            }
            let g = scc(l, m, 6, 1);
            assert_eq!(g.transcript().measured_rate().unwrap(), scscc_rate(chain));
        }
        for sigma in 2..=4 {
            let g = hsc(l, sigma, 6, 1);
            assert_eq!(g.transcript().measured_rate().unwrap(), hscbcc_rate(l, sigma));
        }
    }
    assert_eq!(hsc(50, 2, 4, 0).transcript().measured_rate().unwrap(), Rate::new(98, 298));
}

#[test]
fn encoders_are_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in [gsc(6, 2, 12, 2, Rate::new(1, 3), 3), scc(6, 1, 8, 3), hsc(6, 3, 8, 3)] {
        let n = g.info_vars().len();
        for _ in 0..5 {
            let a: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let b: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let (ca, cb, cab) = (g.encode(&a).unwrap(), g.encode(&b).unwrap(), g.encode(&ab).unwrap());
            let sum: Vec<u8> = ca.iter().zip(&cb).map(|(x, y)| x ^ y).collect();
            assert_eq!(sum, cab);
        }
        assert!(g.encode(&vec![0; n]).unwrap().iter().all(|&b| b == 0));
    }
}

#[test]
fn without_repetition_each_bit_enters_each_encoder_once() {
    let g = gsc(5, 1, 10, 1, Rate::new(1, 1), 2);
    let mut uses = vec![0usize; g.vars().len()];
    for f in g.factors() {
        for &v in &f.inputs {
            uses[v] += 1;
        }
    }
    for &v in g.info_vars() {
        assert_eq!(uses[v], 2);
    }
}

#[test]
fn memory_zero_scscc_blocks_are_independent() {
    let g = scc(4, 0, 8, 1);
    for f in g.factors() {
        assert!(f.inputs.iter().all(|&v| g.vars()[v].position == f.position));
    }
}

fn noisy_frame(g: &TurboGraph, info: &[u8], erase: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let bits = g.encode(info).unwrap();
    let received: Vec<f64> = g
        .transmitted()
        .iter()
        .map(|&v| {
            if rng.random_bool(erase) {
                0.0
            } else if bits[v] == 0 {
                S
            } else {
                -S
            }
        })
        .collect();
    g.expand_llr(&received).unwrap()
}

#[test]
fn noiseless_window_decoding_recovers_every_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cases: Vec<(TurboGraph, usize)> = vec![
        (gsc(8, 1, 12, 2, Rate::new(1, 3), 1), 1),
        (gsc(8, 2, 12, 2, Rate::new(1, 2), 1), 2),
        (scc(8, 1, 10, 1), 1),
        (scc(8, 2, 12, 1), 2),
        (hsc(8, 2, 10, 1), 1),
        (hsc(8, 4, 10, 1), 2),
    ];
    for (mut g, m) in cases {
        g.puncture_to_rate(Rate::new(1, 2), &[GROUP_UPPER, GROUP_LOWER, GROUP_OUTER, GROUP_INNER, GROUP_PARITY], 4)
            .unwrap();
        let n = g.info_vars().len();
        let info: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let llr = noisy_frame(&g, &info, 0.0, &mut rng);
        let out = window_decode(&g, &llr, WindowConfig::new(m + 2, 20)).unwrap();
        assert_eq!(out.info, info);
    }
}

#[test]
fn window_decoding_fills_erasures() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for g in [gsc(10, 1, 60, 2, Rate::new(1, 3), 7), scc(10, 1, 60, 7), hsc(10, 2, 60, 7)] {
        let n = g.info_vars().len();
        let info: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let llr = noisy_frame(&g, &info, 0.3, &mut rng);
        let out = window_decode(&g, &llr, WindowConfig::new(4, 30)).unwrap();
        assert_eq!(out.info, info);
    }
}

#[test]
fn puncturing_hits_target_rate() {
    let mut g = hsc(50, 2, 100, 1);
    g.puncture_to_rate(Rate::new(1, 2), &[GROUP_PARITY], 3).unwrap();
    assert_eq!(g.transcript().measured_rate().unwrap(), Rate::new(1, 2));
}
