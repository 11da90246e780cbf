//! solitonlab: construct singular Ricci solitons, evolve them under the
//! Ricci flow and solve the perturbation system with energy monitoring.
//!
//! Exit codes: 0 all checks passed, 1 error, 2 check failure.

use clap::{Arg, ArgAction, Command};
use solitonlab_cli::commands;
use solitonlab_cli::config::{RunConfig, KEYS};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

fn with_config_args(mut cmd: Command) -> Command {
    cmd = cmd
        .arg(Arg::new("config").long("config").value_name("FILE").help("key=value config file"))
        .arg(
            Arg::new("out")
                .long("out")
                .value_name("DIR")
                .default_value("out")
                .help("output directory for artifacts"),
        )
        .arg(
            Arg::new("json")
                .long("json")
                .action(ArgAction::SetTrue)
                .help("print the machine-readable report to stdout"),
        );
    for (key, default, help) in KEYS {
        cmd = cmd.arg(
            Arg::new(*key)
                .long(key)
                .value_name("V")
                .allow_hyphen_values(true)
                .help(format!("{help} [default: {default}]")),
        );
    }
    cmd
}

fn cli() -> Command {
    Command::new("solitonlab")
        .about("numerical laboratory for singular Ricci solitons under the Ricci flow")
        .subcommand_required(true)
        .subcommand(
            with_config_args(Command::new("soliton").about(
                "integrate the phase-space system, reconstruct the profile and verify asymptotics",
            ))
            .arg(
                Arg::new("check-explicit")
                    .long("check-explicit")
                    .action(ArgAction::SetTrue)
                    .help("also verify the closed-form n = 4 profile"),
            ),
        )
        .subcommand(with_config_args(
            Command::new("evolve").about("run the diffeomorphism flow and check the opening-up bounds"),
        ))
        .subcommand(with_config_args(
            Command::new("perturb").about("solve the perturbation system by Picard iteration"),
        ))
        .subcommand(with_config_args(
            Command::new("verify").about("run the full acceptance suite"),
        ))
        .subcommand(with_config_args(
            Command::new("sweep").about("parameter sweeps with an aggregated report"),
        ))
}

fn run() -> anyhow::Result<bool> {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let mut overrides = BTreeMap::new();
    for (key, _, _) in KEYS {
        if let Some(v) = sub.get_one::<String>(key) {
            overrides.insert(key.to_string(), v.clone());
        }
    }
    let config_file = sub.get_one::<String>("config").map(PathBuf::from);
    let out = PathBuf::from(sub.get_one::<String>("out").expect("default"));
    let json = sub.get_flag("json");
    let check_explicit = name == "soliton" && sub.get_flag("check-explicit");
    let cfg = RunConfig::assemble(config_file.as_deref(), &overrides, out, json, check_explicit)?;
    match name {
        "soliton" => commands::run_soliton(&cfg),
        "evolve" => commands::run_evolve(&cfg),
        "perturb" => commands::run_perturb(&cfg),
        "verify" => commands::run_verify(&cfg),
        "sweep" => commands::run_sweep(&cfg),
        other => unreachable!("unknown subcommand {other}"),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
