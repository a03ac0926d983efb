use clap::{Arg, ArgAction, ArgMatches};
use sccode_cli::config::KEYS;
use sccode_cli::{run_experiment, CliError, Command, ExperimentConfig, Settings};
use std::process::ExitCode;

const SUBCOMMANDS: &[(&str, Command, &str)] = &[
    ("construct", Command::Construct, "lift an SC-LDPC chain and write its QC matrix"),
    ("threshold", Command::Threshold, "BP threshold of an SC-LDPC chain by density evolution"),
    ("ber", Command::Ber, "Monte Carlo BER/FER over a channel parameter sweep"),
    ("trace", Command::Trace, "peeling-decoder degree-one trajectories and scaling statistics"),
    ("girth", Command::Girth, "girth of a QC matrix"),
];

fn key_args() -> Vec<Arg> {
    let mut args = vec![
        Arg::new("config")
            .long("config")
            .alias("code-spec")
            .value_name("FILE")
            .help("key=value config file"),
        Arg::new("set")
            .long("set")
            .short('s')
            .value_name("KEY=VALUE")
            .action(ArgAction::Append)
            .help("override any config key"),
    ];
    for &(key, default, help) in KEYS {
        let mut arg = Arg::new(key).long(key).help(format!("{help} [default: {default}]"));
        arg = match key {
            "params" => arg.alias("param"),
            "length" => arg.alias("L"),
            "memory" => arg.alias("m"),
            _ => arg,
        };
        args.push(arg);
    }
    args
}

fn settings(matches: &ArgMatches) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    if let Some(path) = matches.get_one::<String>("config") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
        s.apply_file(&text)?;
    }
    for pair in matches.get_many::<String>("set").into_iter().flatten() {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {pair:?}")))?;
        s.set(key.trim(), value)?;
    }
    for &(key, _, _) in KEYS {
        if let Some(value) = matches.get_one::<String>(key) {
            s.set(key, value)?;
        }
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = clap::Command::new("sccode")
        .about("Spatially coupled code experiments")
        .subcommand_required(true)
        .subcommands(
            SUBCOMMANDS
                .iter()
                .map(|&(name, _, about)| clap::Command::new(name).about(about).args(key_args())),
        );
    let matches = cli.get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let command = SUBCOMMANDS.iter().find(|s| s.0 == name).expect("known subcommand").1;
    let result = settings(sub)
        .and_then(|s| ExperimentConfig::from_settings(command, &s))
        .and_then(|cfg| run_experiment(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sccode: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
