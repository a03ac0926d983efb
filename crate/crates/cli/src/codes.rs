//! Builds codes and simulators from an [`ExperimentConfig`].

use sccode::chain::{ChainSpec, Rate};
use sccode::channels::PuncturePattern;
use sccode::de::{puncture_for_rate, PunctureReference};
use sccode::ldpc::{ChainLayout, TannerGraph};
use sccode::protograph::{
    build_coupled_base, lift, regular_36_chain, BaseMatrix, CoupledBaseMatrix, EdgeSpreading, QcMatrix, ShiftRule,
};
use sccode::turbo::families::{GROUP_LOWER, GROUP_UPPER};
use sccode::turbo::{gscpcc, hscbcc, scscc, ConvCode, GscPccConfig, HscBccConfig, RepetitionSpec, ScSccConfig, TurboGraph};
use sccode::zipper::{staircase_rate, BchCode, IhddConfig, ZipperSpec};

use crate::config::{ExperimentConfig, Family};
use crate::sim::{FrameSimulator, LdpcSim, StaircaseSim, TurboSim};
use crate::CliError;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn rate_f64(r: Rate) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Iteration budget when `iters=auto`.
pub fn default_iters(cfg: &ExperimentConfig, window: usize) -> usize {
    match cfg.family {
        Family::ScLdpc if window == 0 => 500,
        Family::ScLdpc => 200,
        Family::Staircase => 10,
        _ => 20,
    }
}

/// Window size when `window=auto`: full BP for SC-LDPC codes.
pub fn default_window(cfg: &ExperimentConfig) -> usize {
    match cfg.family {
        Family::ScLdpc => 0,
        _ => 8,
    }
}

pub fn coupled_base(cfg: &ExperimentConfig) -> Result<CoupledBaseMatrix, CliError> {
    let Some(components) = &cfg.spreading else {
        return regular_36_chain(cfg.length, cfg.memory).map_err(config_err);
    };
    if components.len() != cfg.memory + 1 {
        return Err(CliError::Config(format!(
            "spreading has {} components, memory {} needs {}",
            components.len(),
            cfg.memory,
            cfg.memory + 1
        )));
    }
    let blocks: Vec<BaseMatrix> = components
        .iter()
        .map(|rows| {
            let rows: Vec<&[u32]> = rows.iter().map(Vec::as_slice).collect();
            BaseMatrix::component_from_rows(&rows)
        })
        .collect::<Result<_, _>>()
        .map_err(config_err)?;
    let (rows, cols) = (blocks[0].rows(), blocks[0].cols());
    if blocks.iter().any(|b| b.rows() != rows || b.cols() != cols) {
        return Err(CliError::Config("spreading components differ in shape".into()));
    }
    let sum: Vec<u32> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| blocks.iter().map(|b| b.get(r, c)).sum())
        .collect();
    let base = BaseMatrix::new(rows, cols, sum).map_err(config_err)?;
    let spread = EdgeSpreading::new(base, blocks).map_err(config_err)?;
    let chain = ChainSpec::new(cfg.length, cfg.memory).map_err(config_err)?;
    build_coupled_base(&spread, chain).map_err(config_err)
}

/// The QC matrix from `code`, or a seeded lift of the coupled base.
pub fn qc_matrix(cfg: &ExperimentConfig, base: &CoupledBaseMatrix) -> Result<QcMatrix, CliError> {
    let Some(path) = &cfg.code else {
        return lift(base, cfg.lifting, &ShiftRule::Random { seed: cfg.code_seed }).map_err(config_err);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    let qc = QcMatrix::from_text(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    if qc.block_rows() != base.rows() || qc.block_cols() != base.cols() || qc.lifting() != cfg.lifting {
        return Err(CliError::Config(format!(
            "{path}: {}x{} blocks of size {} do not match length, memory and lifting ({}x{} of size {})",
            qc.block_rows(),
            qc.block_cols(),
            qc.lifting(),
            base.rows(),
            base.cols(),
            cfg.lifting
        )));
    }
    Ok(qc)
}

/// Puncturing fraction of an SC-LDPC chain: explicit, or the fraction
/// that brings the asymptotic rate to `target-rate`.
pub fn ldpc_puncture(cfg: &ExperimentConfig, base: &CoupledBaseMatrix) -> f64 {
    match (cfg.puncture, cfg.target_rate) {
        (Some(p), _) => p,
        (None, Some(r)) => puncture_for_rate(base, rate_f64(r), PunctureReference::Asymptotic),
        (None, None) => 0.0,
    }
}

pub fn ldpc_sim(cfg: &ExperimentConfig) -> Result<LdpcSim, CliError> {
    let base = coupled_base(cfg)?;
    let qc = qc_matrix(cfg, &base)?;
    let graph = TannerGraph::from_matrix(&qc.to_sparse());
    let layout = ChainLayout::lifted(&base, cfg.lifting);
    let window = cfg.window.or(default_window(cfg));
    if window > layout.check_positions() {
        return Err(CliError::Config(format!(
            "window {window} exceeds the {} check positions",
            layout.check_positions()
        )));
    }
    let puncture = ldpc_puncture(cfg, &base);
    let pattern = PuncturePattern::random(graph.vars(), puncture, cfg.code_seed).map_err(config_err)?;
    let design = qc.transcript(&base).measured_rate().map_err(config_err)?;
    let rate = cfg.target_rate.map_or(rate_f64(design) / (1.0 - puncture), rate_f64);
    Ok(LdpcSim {
        graph,
        layout,
        pattern,
        window,
        iters: cfg.iters.or(default_iters(cfg, window)),
        rate,
    })
}

pub fn turbo_graph(cfg: &ExperimentConfig) -> Result<TurboGraph, CliError> {
    let chain = || ChainSpec::new(cfg.length, cfg.memory).map_err(config_err);
    let code = |default: &str| ConvCode::parse(cfg.generator.as_deref().unwrap_or(default)).map_err(config_err);
    let mut g = match cfg.family {
        Family::GscPcc => gscpcc(&GscPccConfig {
            code: code("[1,5/7]")?,
            repetition: if cfg.q == 1 {
                RepetitionSpec::none()
            } else {
                RepetitionSpec::new(cfg.q, cfg.lambda_r).map_err(config_err)?
            },
            chain: chain()?,
            block: cfg.block,
            seed: cfg.code_seed,
        }),
        Family::ScScc => {
            let c = code("[1,5/7]")?;
            scscc(&ScSccConfig {
                outer: c.clone(),
                inner: c,
                chain: chain()?,
                block: cfg.block,
                seed: cfg.code_seed,
            })
        }
        Family::HscBcc => hscbcc(&HscBccConfig {
            code: code("[1,0,5/7;0,1,3/7]")?,
            length: cfg.length,
            sigma: cfg.sigma,
            block: cfg.block,
            seed: cfg.code_seed,
        }),
        _ => unreachable!("not a turbo-like family"),
    }
    .map_err(config_err)?;
    if let Some(r) = cfg.target_rate {
        // both parity groups of every family are eligible
        g.puncture_to_rate(r, &[GROUP_UPPER, GROUP_LOWER], cfg.code_seed)
            .map_err(config_err)?;
    }
    Ok(g)
}

pub fn turbo_sim(cfg: &ExperimentConfig) -> Result<TurboSim, CliError> {
    let graph = turbo_graph(cfg)?;
    let rate = rate_f64(graph.transcript().measured_rate().map_err(config_err)?);
    let window = cfg.window.or(default_window(cfg));
    if window == 0 || window > graph.positions() {
        return Err(CliError::Config(format!("window must lie in 1..={}", graph.positions())));
    }
    Ok(TurboSim {
        graph,
        window,
        iters: cfg.iters.or(default_iters(cfg, window)),
        rate,
    })
}

/// Shortened primitive BCH code with the given `n, k, t`.
pub fn bch_component(n: usize, k: usize, t: usize) -> Result<BchCode, CliError> {
    let m = (2..=16u32)
        .find(|&m| (1usize << m) > n)
        .ok_or_else(|| CliError::Config(format!("component length {n} is too large")))?;
    let code = BchCode::new(m, t)
        .and_then(|c| c.shortened((1 << m) - 1 - n))
        .map_err(config_err)?;
    if code.k() != k {
        return Err(CliError::Config(format!(
            "a t={t} BCH code of length {n} has dimension {}, not {k}",
            code.k()
        )));
    }
    Ok(code)
}

pub fn staircase_sim(cfg: &ExperimentConfig) -> Result<StaircaseSim, CliError> {
    let (n, k, t) = cfg.component;
    let spec = ZipperSpec::staircase(bch_component(n, k, t)?).map_err(config_err)?;
    let half = n / 2;
    if cfg.blocks == 0 {
        return Err(CliError::Config("blocks must be at least 1".into()));
    }
    Ok(StaircaseSim {
        spec,
        rows: cfg.blocks * half,
        termination: half,
        cfg: IhddConfig::staircase(half, cfg.ihdd_window, cfg.iters.or(default_iters(cfg, 0))),
        rate: rate_f64(staircase_rate(n, k)),
    })
}

pub fn simulator(cfg: &ExperimentConfig) -> Result<Box<dyn FrameSimulator>, CliError> {
    Ok(match cfg.family {
        Family::ScLdpc => Box::new(ldpc_sim(cfg)?),
        Family::Staircase => Box::new(staircase_sim(cfg)?),
        _ => Box::new(turbo_sim(cfg)?),
    })
}
