//! Subcommand implementations. Each returns the exit code and the report.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use keller_algebra::{verify_certificate, Certificate, ExactMatrix, GaussianRational};
use keller_core::checker::{
    check_c1, check_c2, check_jc, check_zk, explore_slice, overall_status, CheckConfig, CheckError,
};
use keller_core::corpus::{Corpus, Published};
use keller_core::matrixio::{matrix_hash, parse_matrix, pretty_json};
use keller_core::oracle::{derivation_check, OracleConfig, OracleError, OracleOutcome};
use keller_core::randgen::{generate, GenSpec};
use keller_core::sysbuild::{is_druzkowski, DruzkowskiMode};
use keller_core::transform::{
    diagonal_conjugate, normalize_witness, permute_matrix, permute_vector, support_first_permutation, DiagonalAction,
};
use keller_core::{Status, Verdict};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::report::{append_line, certificates, write_atomic, write_certificates, RunReport};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SOFTWARE: i32 = 70;

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or input files.
    Usage(String),
    /// The engine or the file system failed.
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Internal(_) => EXIT_SOFTWARE,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<CheckError> for Failure {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Engine(_) => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Internal(format!("{}: {e}", path.display()))
}

type Outcome = Result<i32, Failure>;

/// Shared context: the raw arguments and a report under construction.
pub struct Run {
    pub report: RunReport,
}

impl Run {
    pub fn new(command: &str, arguments: &[String]) -> Self {
        Run {
            report: RunReport::new(command, arguments),
        }
    }

    fn finish(&mut self, output: &OutputArgs, outcome: impl fmt::Display, code: i32, results: Value) -> Outcome {
        self.report.outcome = outcome.to_string();
        self.report.exit_code = code;
        self.report.results = results;
        if let Some(path) = &output.json {
            append_line(path, &self.report.to_line()).map_err(|e| io_failure(path, e))?;
        }
        Ok(code)
    }

    fn set_config(&mut self, cfg: &impl Serialize) {
        self.report.config = Some(serde_json::to_value(cfg).expect("config serializes"));
    }

    fn save_certificates(&mut self, output: &OutputArgs, verdicts: &[(String, &Verdict)]) -> Result<(), Failure> {
        let Some(dir) = &output.cert_dir else { return Ok(()) };
        let mut certs = Vec::new();
        for (label, v) in verdicts {
            certificates(label, v, &mut certs);
        }
        let hash = self.report.input_hash.clone().unwrap_or_default();
        let paths = write_certificates(dir, &hash, &certs).map_err(|e| io_failure(dir, e))?;
        for p in &paths {
            say(output, format!("certificate written to {}", p.display()));
        }
        self.report.certificates = paths;
        Ok(())
    }
}

fn quiet(output: &OutputArgs) -> bool {
    output.json.as_deref().is_some_and(|p| p.as_os_str() == "-")
}

fn say(output: &OutputArgs, text: impl fmt::Display) {
    if !quiet(output) {
        println!("{text}");
    }
}

pub fn read_matrix(path: &Path) -> Result<ExactMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_scalars(text: &str) -> Result<Vec<GaussianRational>, Failure> {
    text.split(',')
        .map(|s| GaussianRational::parse(s.trim()).map_err(|e| Failure::Usage(format!("scalar {:?}: {e}", s.trim()))))
        .collect()
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(|e| io_failure(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn describe(v: &Verdict) -> String {
    let mut s = v.status.to_string();
    if let Some(p) = v.fast_path {
        s.push_str(&format!(" (fast path: {p})"));
    }
    s.push_str(&format!(" in {:.3}s", v.stats.elapsed_secs));
    s
}

pub fn check(run: &mut Run, kind: &str, args: &CheckArgs) -> Outcome {
    let a = read_matrix(&args.matrix)?;
    let cfg = args.engine.config();
    run.report.input_hash = Some(matrix_hash(&a));
    run.set_config(&cfg);
    let verdict = match kind {
        "c1" => check_c1(&a, &cfg)?,
        "c2" => check_c2(&a, &cfg)?,
        "jc" => check_jc(&a, &cfg)?,
        _ => unreachable!("unknown check {kind}"),
    };
    say(&args.output, format!("{}: {}", kind.to_uppercase(), describe(&verdict)));
    run.save_certificates(&args.output, &[(kind.to_string(), &verdict)])?;
    let results = json!({ kind: verdict });
    run.finish(&args.output, verdict.status, verdict.status.exit_code(), results)
}

pub fn check_zk_cmd(run: &mut Run, args: &ZkArgs) -> Outcome {
    let a = read_matrix(&args.check.matrix)?;
    let n = a.rows();
    let ks = match &args.k {
        Some(text) => parse_k_list(text).map_err(Failure::Usage)?,
        None => (3..=n).collect(),
    };
    if ks.is_empty() {
        return Err(Failure::Usage(format!("no admissible k for n = {n}")));
    }
    let cfg = args.check.engine.config();
    run.report.input_hash = Some(matrix_hash(&a));
    run.set_config(&json!({ "check": cfg, "variant": args.variant, "k": ks }));
    let verdicts = check_zk(&a, &ks, args.variant, &cfg)?;
    for (k, v) in &verdicts {
        say(&args.check.output, format!("Z_{k} ({}): {}", args.variant, describe(v)));
    }
    let status = overall_status(&verdicts);
    say(&args.check.output, format!("overall: {status}"));
    let labelled: Vec<(String, &Verdict)> = verdicts.iter().map(|(k, v)| (format!("zk{k}"), v)).collect();
    run.save_certificates(&args.check.output, &labelled)?;
    let results: BTreeMap<String, &Verdict> = verdicts.iter().map(|(k, v)| (k.to_string(), v)).collect();
    run.finish(&args.check.output, status, status.exit_code(), json!(results))
}

pub fn is_druzkowski_cmd(run: &mut Run, args: &DruzkowskiArgs) -> Outcome {
    let a = read_matrix(&args.matrix)?;
    let mode = match args.trials {
        Some(trials) => DruzkowskiMode::Randomized {
            trials,
            seed: args.seed,
            bound: args.bound,
        },
        None => DruzkowskiMode::default(),
    };
    run.report.input_hash = Some(matrix_hash(&a));
    run.set_config(&mode);
    let v = is_druzkowski(&a, &mode).map_err(|e| Failure::Usage(e.to_string()))?;
    say(&args.output, format!("druzkowski: {}", describe(&v)));
    let status = v.status;
    run.finish(&args.output, status, status.exit_code(), json!({ "druzkowski": v }))
}

pub fn conjugate(args: &ConjugateArgs) -> Outcome {
    let a = read_matrix(&args.matrix)?;
    let d = DiagonalAction::new(parse_scalars(&args.diag)?).map_err(|e| Failure::Usage(e.to_string()))?;
    let b = diagonal_conjugate(&a, &d).map_err(|e| Failure::Usage(e.to_string()))?;
    emit_text(args.out.as_deref(), &pretty_json(&b))?;
    Ok(0)
}

#[derive(Serialize)]
struct Normalized {
    /// Old index at each new position.
    permutation: Vec<usize>,
    diagonal: Vec<GaussianRational>,
    k: usize,
    witness: Vec<GaussianRational>,
    matrix: ExactMatrix,
}

pub fn normalize(args: &NormalizeArgs) -> Outcome {
    let a = read_matrix(&args.matrix)?;
    let z = parse_scalars(&args.witness)?;
    if !a.is_square() || z.len() != a.rows() {
        return Err(Failure::Usage(format!(
            "witness has {} entries for a {}x{} matrix",
            z.len(),
            a.rows(),
            a.cols()
        )));
    }
    let (d, scaled) = normalize_witness(&z);
    let b = diagonal_conjugate(&a, &d).map_err(|e| Failure::Usage(e.to_string()))?;
    let perm = support_first_permutation(&scaled);
    let witness = permute_vector(&scaled, &perm);
    let zero = GaussianRational::from_int(0);
    let out = Normalized {
        k: witness.iter().filter(|w| **w != zero).count(),
        matrix: permute_matrix(&b, &perm),
        diagonal: d.entries().to_vec(),
        permutation: perm,
        witness,
    };
    let text = serde_json::to_string_pretty(&out).expect("serializes") + "\n";
    emit_text(args.out.as_deref(), &text)?;
    Ok(0)
}

pub fn random(args: &RandomArgs) -> Outcome {
    let mut spec = GenSpec::new(args.family, args.n, args.rank.unwrap_or(args.n), args.seed).with_bound(args.bound);
    spec.nonnegative = args.nonnegative;
    let a = generate(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
    emit_text(args.out.as_deref(), &pretty_json(&a))?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct EntryReport {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_hash: Option<String>,
    checks: BTreeMap<String, Status>,
    discrepancies: Vec<String>,
    unknown: Vec<String>,
}

fn run_entry(corpus: &Corpus, id: &str, structural: bool, cfg: &CheckConfig) -> EntryReport {
    let mut rep = EntryReport {
        id: id.to_string(),
        input_hash: None,
        checks: BTreeMap::new(),
        discrepancies: Vec::new(),
        unknown: Vec::new(),
    };
    let entry = match corpus.load(id) {
        Ok(e) => e,
        Err(e) => {
            rep.discrepancies.push(e.to_string());
            return rep;
        }
    };
    rep.input_hash = Some(matrix_hash(&entry.matrix));
    rep.checks.insert("structure".into(), Status::Holds);
    let a = &entry.matrix;
    let record = |rep: &mut EntryReport, name: &str, expect_holds: bool, got: Result<Verdict, String>| match got {
        Err(e) => rep.discrepancies.push(format!("{name}: {e}")),
        Ok(v) => {
            rep.checks.insert(name.into(), v.status);
            match v.status {
                Status::Unknown => rep.unknown.push(name.into()),
                s if (s == Status::Holds) != expect_holds => {
                    rep.discrepancies.push(format!("{name}: expected {}, got {s}", if expect_holds { "HOLDS" } else { "FAILS" }))
                }
                _ => {}
            }
        }
    };
    let druz = is_druzkowski(a, &cfg.druzkowski.mode_for(a.rows())).map_err(|e| e.to_string());
    record(&mut rep, "druzkowski", entry.expected.is_druzkowski, druz);
    if structural {
        return rep;
    }
    if entry.expected.c1 == Published::Holds {
        record(&mut rep, "c1", true, check_c1(a, cfg).map_err(|e| e.to_string()));
    }
    if entry.expected.jc == Published::Holds {
        record(&mut rep, "jc", true, check_jc(a, cfg).map_err(|e| e.to_string()));
    }
    rep
}

pub fn corpus_run(run: &mut Run, args: &CorpusArgs) -> Outcome {
    let corpus = match &args.corpus_dir {
        Some(dir) => Corpus::from_dir(dir).map_err(|e| Failure::Usage(e.to_string()))?,
        None => Corpus::embedded(),
    };
    let ids = match &args.only {
        Some(id) if corpus.ids().contains(id) => vec![id.clone()],
        Some(id) => return Err(Failure::Usage(format!("unknown corpus entry {id:?}"))),
        None => corpus.ids(),
    };
    let cfg = args.engine.config();
    run.set_config(&cfg);
    let reports: Vec<EntryReport> = ids
        .par_iter()
        .map(|id| run_entry(&corpus, id, args.structural, &cfg))
        .collect();
    for r in &reports {
        let checks: Vec<String> = r.checks.iter().map(|(k, s)| format!("{k}={s}")).collect();
        say(&args.output, format!("{}: {}", r.id, checks.join(" ")));
        for d in &r.discrepancies {
            say(&args.output, format!("{}: MISMATCH {d}", r.id));
        }
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.discrepancies.is_empty())
        .map(|r| r.id.as_str())
        .collect();
    let (outcome, code) = if !failed.is_empty() {
        (format!("MISMATCH {}", failed.join(",")), 1)
    } else if reports.iter().any(|r| !r.unknown.is_empty()) {
        ("UNKNOWN".to_string(), 2)
    } else {
        ("OK".to_string(), 0)
    };
    say(&args.output, format!("corpus: {outcome}"));
    run.finish(&args.output, outcome, code, json!(reports))
}

pub fn slice(run: &mut Run, args: &SliceArgs) -> Outcome {
    let mut cfg = args.engine.config();
    cfg.slice_limit = args.limit;
    run.set_config(&cfg);
    let report = explore_slice(args.n, args.k, args.rank, &cfg)?;
    say(
        &args.output,
        format!(
            "slice (n={}, k={}, r={}): {} in {:.3}s",
            args.n, args.k, args.rank, report.outcome, report.elapsed_secs
        ),
    );
    let code = report.outcome.exit_code();
    run.finish(&args.output, report.outcome, code, json!(report))
}

pub fn oracle(run: &mut Run, args: &OracleArgs) -> Outcome {
    let a = read_matrix(&args.matrix)?;
    let mut cfg = OracleConfig {
        limit: args.limit,
        ..OracleConfig::default()
    };
    if let Some(Timeout(t)) = args.timeout {
        cfg.wall_clock = t;
    }
    run.report.input_hash = Some(matrix_hash(&a));
    run.set_config(&cfg);
    let report = derivation_check(&a, &cfg).map_err(|e: OracleError| Failure::Usage(e.to_string()))?;
    let (status, code) = match report.outcome {
        OracleOutcome::Invertible => ("INVERTIBLE", 0),
        OracleOutcome::NotInvertible => ("NOT_INVERTIBLE", 1),
        OracleOutcome::Unknown => ("UNKNOWN", 2),
    };
    say(&args.output, format!("oracle: {status} in {:.3}s", report.elapsed_secs));
    run.finish(&args.output, status, code, json!(report))
}

pub fn verify_cert(run: &mut Run, args: &VerifyArgs) -> Outcome {
    let path = &args.cert;
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let cert: Certificate = serde_json::from_str(&text).map_err(|e| {
        Failure::Usage(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })?;
    let (outcome, code, detail) = match verify_certificate(&cert) {
        Ok(()) => ("VALID".to_string(), 0, Value::Null),
        Err(e) => ("INVALID".to_string(), 1, json!(e.to_string())),
    };
    say(&args.output, format!("certificate: {outcome}{}", detail.as_str().map(|d| format!(" ({d})")).unwrap_or_default()));
    let results = json!({ "unit": cert.claims_unit(), "basis_size": cert.basis.len(), "error": detail });
    run.finish(&args.output, outcome, code, results)
}
