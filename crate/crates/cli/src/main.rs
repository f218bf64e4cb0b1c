//! `keller`: exit 0 holds, 1 fails, 2 unknown, 64 usage error, 70 internal error.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{CheckCommand, Cli, Command, CorpusCommand};
use commands::{Run, EXIT_USAGE};

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check(CheckCommand::C1(_)) => "check c1",
        Command::Check(CheckCommand::C2(_)) => "check c2",
        Command::Check(CheckCommand::Jc(_)) => "check jc",
        Command::Check(CheckCommand::Zk(_)) => "check zk",
        Command::IsDruzkowski(_) => "is-druzkowski",
        Command::Conjugate(_) => "conjugate",
        Command::Normalize(_) => "normalize",
        Command::Random(_) => "random",
        Command::Corpus(CorpusCommand::Run(_)) => "corpus run",
        Command::ExploreSlice(_) => "explore-slice",
        Command::Oracle(_) => "oracle",
        Command::VerifyCert(_) => "verify-cert",
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            return ExitCode::from(code as u8);
        }
    };
    let mut run = Run::new(command_name(&cli.command), &argv[1..]);
    let outcome = match &cli.command {
        Command::Check(CheckCommand::C1(a)) => commands::check(&mut run, "c1", a),
        Command::Check(CheckCommand::C2(a)) => commands::check(&mut run, "c2", a),
        Command::Check(CheckCommand::Jc(a)) => commands::check(&mut run, "jc", a),
        Command::Check(CheckCommand::Zk(a)) => commands::check_zk_cmd(&mut run, a),
        Command::IsDruzkowski(a) => commands::is_druzkowski_cmd(&mut run, a),
        Command::Conjugate(a) => commands::conjugate(a),
        Command::Normalize(a) => commands::normalize(a),
        Command::Random(a) => commands::random(a),
        Command::Corpus(CorpusCommand::Run(a)) => commands::corpus_run(&mut run, a),
        Command::ExploreSlice(a) => commands::slice(&mut run, a),
        Command::Oracle(a) => commands::oracle(&mut run, a),
        Command::VerifyCert(a) => commands::verify_cert(&mut run, a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
