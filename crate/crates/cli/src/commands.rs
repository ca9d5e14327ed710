use std::path::{Path, PathBuf};

use gsbench::budget::Budget;
use gsbench::campaign::{
    default_levers, run_campaign, summarize, CampaignArchive, CampaignSettings, ExternalProposer, MutationProposer,
    Payload, Problem, Proposer, ScriptedProposer,
};
use gsbench::dmrg::{make_reference, mi_error, mutual_information, run_dmrg, DmrgOutcome, DmrgProtocol, InitKind};
use gsbench::hamiltonian::{exact_ground, free_fermion_ground_energy, FreeFermionFamily};
use gsbench::io::{fmt_real, matrix_from_csv, matrix_to_csv, parse_real, write_file};
use gsbench::presets::{self, BenchChain};
use gsbench::projector::{factorize, pe_stats, run_projector, ProjectorConfig, DEFAULT_LAMBDA};
use gsbench::vqe::{run_vqe, trace_to_csv, VqeProtocol};
use serde_json::json;

use crate::config::{payload_from_value, CampaignConfig, ProblemSpec, ProposerSpec};
use crate::{BenchArgs, CliError};

const VQE_DMRG_SECONDS: f64 = 20.0;
const PROJECTOR_SECONDS: f64 = 300.0;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn print_json(value: &serde_json::Value) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn read_payload(path: &Path, family: gsbench::campaign::Family) -> Result<Payload, CliError> {
    let value: toml::Value = toml::from_str(&read(path)?)?;
    payload_from_value(family, value)
}

fn write_outputs(out: Option<&Path>, files: &[(&str, String)]) -> Result<(), CliError> {
    if let Some(dir) = out {
        for (name, body) in files {
            write_file(&dir.join(name), body)?;
        }
    }
    Ok(())
}

pub fn oracle_ed(spec: &ProblemSpec) -> Result<(), CliError> {
    let problem = spec.resolve(Path::new("."))?;
    let (energy, _) = exact_ground(problem.hamiltonian_ref()?)?;
    print_json(&json!({ "problem": problem.name(), "method": "exact", "energy": energy }))
}

pub fn oracle_ff(spec: &ProblemSpec) -> Result<(), CliError> {
    let chain = spec.chain_spec()?.ok_or_else(|| CliError::Usage("free-fermion oracle needs a chain".into()))?;
    let family = FreeFermionFamily::classify(&chain)
        .ok_or_else(|| CliError::Usage("chain is neither XX nor transverse-field Ising".into()))?;
    let energy = free_fermion_ground_energy(&chain)?;
    print_json(&json!({ "chain": chain, "family": format!("{family:?}"), "energy": energy }))
}

pub fn bench_vqe(args: &BenchArgs) -> Result<(), CliError> {
    let problem = args.problem.spec().resolve(Path::new("."))?;
    let mut protocol: VqeProtocol = match &args.protocol {
        Some(p) => match read_payload(p, gsbench::campaign::Family::Vqe)? {
            Payload::Vqe(v) => v,
            _ => unreachable!("decoded as vqe"),
        },
        None => presets::vqe_pool_baseline(problem.hamiltonian_ref()?.num_sites(), 2, 0),
    };
    if let Some(seed) = args.seed {
        protocol.ansatz.seed = seed;
        protocol.optimizer.seed = seed;
    }
    let budget = args.budget.budget().unwrap_or(Budget::WallTime(VQE_DMRG_SECONDS));
    let r = run_vqe(problem.hamiltonian_ref()?, &protocol, budget, problem.reference_energy())?;
    let summary = json!({
        "problem": problem.name(),
        "best_energy": r.best_energy,
        "delta_e": r.delta_e,
        "reference_energy": problem.reference_energy(),
        "evaluations": r.evaluations_used,
        "stop": r.stop,
        "best_params": r.best_params,
    });
    write_outputs(
        args.out.as_deref(),
        &[("trace.csv", trace_to_csv(&r.evaluation_trace)), ("summary.json", serde_json::to_string_pretty(&summary)?)],
    )?;
    print_json(&summary)
}

fn dmrg_trace_csv(out: &DmrgOutcome) -> String {
    let mut s = String::from("stage,sweep,bond_limit,max_bond,energy,max_discarded\n");
    for r in &out.trace {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.stage,
            r.sweep,
            r.bond_limit,
            r.max_bond,
            fmt_real(r.energy),
            fmt_real(r.max_discarded)
        ));
    }
    s
}

pub fn bench_dmrg(args: &BenchArgs, best: bool, with_mi: bool) -> Result<(), CliError> {
    let spec = args.problem.spec();
    let chain = spec.chain_spec()?.ok_or_else(|| CliError::Usage("dmrg needs a chain".into()))?;
    let mut protocol: DmrgProtocol = match (&args.protocol, best) {
        (Some(p), _) => match read_payload(p, gsbench::campaign::Family::Dmrg)? {
            Payload::Dmrg(d) => d,
            _ => unreachable!("decoded as dmrg"),
        },
        (None, true) => {
            let name = spec.chain.as_deref().ok_or_else(|| CliError::Usage("--preset best needs --chain".into()))?;
            BenchChain::parse(name).expect("validated chain name").best_protocol()
        }
        (None, false) => presets::dmrg_baseline(0),
    };
    if let Some(seed) = args.seed {
        for st in &mut protocol.stages {
            if let InitKind::Random { seed: s } = &mut st.init {
                *s = seed;
            }
        }
    }
    let budget = args.budget.budget().unwrap_or(Budget::WallTime(VQE_DMRG_SECONDS));
    let out = run_dmrg(&chain, &protocol, budget)?;
    let exact = if chain.l <= gsbench::hamiltonian::EXACT_CAP {
        Some(exact_ground(&gsbench::hamiltonian::build_spin_chain(&chain)?)?.0)
    } else if FreeFermionFamily::classify(&chain).is_some() {
        Some(free_fermion_ground_energy(&chain)?)
    } else {
        None
    };
    let summary = json!({
        "chain": chain,
        "energy": out.energy,
        "reference_energy": exact,
        "delta_e": exact.map(|e| (out.energy - e).abs()),
        "completed_sweeps": out.completed_sweeps,
        "local_updates": out.local_updates,
        "budget_exhausted": out.budget_exhausted,
        "max_bond": out.state.max_bond(),
    });
    let mut files = vec![("trace.csv", dmrg_trace_csv(&out)), ("summary.json", serde_json::to_string_pretty(&summary)?)];
    if with_mi {
        files.push(("mi.csv", matrix_to_csv(&mutual_information(&out.state)?)));
    }
    write_outputs(args.out.as_deref(), &files)?;
    print_json(&summary)
}

pub fn bench_projector(args: &BenchArgs, lambda: Option<f64>) -> Result<(), CliError> {
    let problem = args.problem.spec().resolve(Path::new("."))?;
    let mut config: ProjectorConfig = match &args.protocol {
        Some(p) => match read_payload(p, gsbench::campaign::Family::Projector)? {
            Payload::Projector(c) => c,
            _ => unreachable!("decoded as projector"),
        },
        None => presets::projector_baseline(0),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let lambda = lambda.unwrap_or(DEFAULT_LAMBDA);
    let budget = args.budget.budget().unwrap_or(Budget::WallTime(PROJECTOR_SECONDS));
    let fact = factorize(&problem.hamiltonian_ref()?.to_dense(), config.field_cutoff)?;
    let mut trace = run_projector(&fact, &config, budget)?;
    trace.rescore(lambda)?;
    let mut summary = trace.summary_json();
    summary["reference_energy"] = json!(problem.reference_energy());
    summary["completed_blocks"] = json!(trace.completed_blocks);
    write_outputs(
        args.out.as_deref(),
        &[("trace.csv", trace.to_csv()), ("summary.json", serde_json::to_string_pretty(&summary)?)],
    )?;
    print_json(&summary)
}

pub fn reference_make(spec: &ProblemSpec, protocol: Option<&Path>, budget: Option<Budget>, root: &Path) -> Result<(), CliError> {
    let chain = spec.chain_spec()?.ok_or_else(|| CliError::Usage("references need a chain".into()))?;
    let protocol = match protocol {
        Some(p) => match read_payload(p, gsbench::campaign::Family::Dmrg)? {
            Payload::Dmrg(d) => d,
            _ => unreachable!("decoded as dmrg"),
        },
        None => presets::reference_protocol(),
    };
    let bundle = make_reference(&chain, &protocol, budget.unwrap_or(Budget::WallTime(600.0)))?;
    let dir = bundle.store(root)?;
    print_json(&json!({ "energy": bundle.energy, "fingerprint": bundle.fingerprint, "dir": dir }))
}

pub struct CampaignOverrides {
    pub seed: Option<u64>,
    pub budget: Option<Budget>,
    pub lambda: Option<f64>,
    pub iterations: Option<usize>,
    pub out: Option<PathBuf>,
}

fn running_best_csv(archive: &CampaignArchive) -> String {
    let mut s = String::from("iteration,score,running_best,accepted\n");
    for (r, best) in archive.records().iter().zip(archive.running_best()) {
        let score = r.score.map(fmt_real).unwrap_or_default();
        s.push_str(&format!("{},{score},{},{}\n", r.iteration, fmt_real(best), r.accepted));
    }
    s
}

pub fn campaign_run(config_path: &Path, o: CampaignOverrides) -> Result<(), CliError> {
    let mut cfg = CampaignConfig::load(config_path)?;
    if let Some(seed) = o.seed {
        cfg.seed = seed;
        if let ProposerSpec::Builtin { seed: s, .. } = &mut cfg.proposer {
            *s = seed;
        }
    }
    if let Some(b) = o.budget {
        cfg.budget = b;
    }
    if o.lambda.is_some() {
        cfg.lambda = o.lambda;
    }
    if let Some(n) = o.iterations {
        cfg.iterations = n;
    }
    if let Some(out) = o.out {
        cfg.output_dir = out;
    }
    cfg.validate()?;

    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let problem: Problem = cfg.problem.resolve(base_dir)?;
    let mut proposer: Box<dyn Proposer> = match &cfg.proposer {
        ProposerSpec::Builtin { seed, levers } => {
            let levers = levers.clone().unwrap_or_else(|| default_levers(cfg.family));
            Box::new(MutationProposer::new(*seed, levers)?)
        }
        ProposerSpec::Scripted { path } => Box::new(ScriptedProposer::from_jsonl(&read(&base_dir.join(path))?)?),
        ProposerSpec::External { command } => Box::new(ExternalProposer::spawn(command)?),
    };
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::Io(cfg.output_dir.clone(), e))?;
    write_file(&cfg.output_dir.join("config.toml"), &cfg.emit()?)?;

    let baseline = gsbench::campaign::Protocol::new(cfg.baseline.clone(), problem.name(), "baseline");
    let settings = CampaignSettings {
        tie_policy: cfg.tie_policy,
        lambda: cfg.lambda.unwrap_or(DEFAULT_LAMBDA),
        seed: cfg.seed,
        log_path: Some(cfg.output_dir.join("campaign.jsonl")),
        ..CampaignSettings::new(cfg.iterations, cfg.budget)
    };
    let archive = run_campaign(&problem, baseline, proposer.as_mut(), &settings)?;
    let summary = summarize(&archive)?;
    write_file(&cfg.output_dir.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    write_file(&cfg.output_dir.join("running_best.csv"), &running_best_csv(&archive))?;
    print_json(&json!({
        "baseline_score": summary.baseline_score,
        "best_score": summary.best_score,
        "best_iteration": summary.best_iteration,
        "accepted": summary.accepted,
        "rejected": summary.rejected,
        "log": cfg.output_dir.join("campaign.jsonl"),
    }))
}

pub fn report_campaign(log: &Path, out: &Path) -> Result<(), CliError> {
    let archive = CampaignArchive::from_jsonl(&read(log)?)?;
    let summary = summarize(&archive)?;
    write_file(&out.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    write_file(&out.join("running_best.csv"), &running_best_csv(&archive))?;
    print_json(&json!({ "best_score": summary.best_score, "accepted": summary.accepted, "rejected": summary.rejected }))
}

fn parse_trace(text: &str) -> Result<Vec<f64>, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim().starts_with("block_index,energy") => {}
        _ => return Err(CliError::Usage("trace must start with a block_index,energy header".into())),
    }
    let mut energies = Vec::new();
    for (i, line) in lines.enumerate() {
        let cell = line.split(',').nth(1).and_then(parse_real);
        let e = cell.ok_or_else(|| gsbench::error::Error::Parse { line: i + 2, msg: format!("bad trace row {line:?}") })?;
        energies.push(e);
    }
    if energies.is_empty() {
        return Err(CliError::Usage("trace has no blocks".into()));
    }
    Ok(energies)
}

pub fn report_trace(trace: &Path, lambda: f64, out: &Path) -> Result<(), CliError> {
    let energies = parse_trace(&read(trace)?)?;
    let (mean, std) = pe_stats(&energies)?;
    let pe_start = energies.len() - energies.len().div_ceil(2);
    let mut blocks = String::from("block_index,energy,in_pe\n");
    for (i, e) in energies.iter().enumerate() {
        blocks.push_str(&format!("{i},{},{}\n", fmt_real(*e), i >= pe_start));
    }
    let score = json!({
        "blocks": energies.len(),
        "pe_start": pe_start,
        "pe_mean": mean,
        "pe_std": std,
        "lambda": lambda,
        "live_score": mean + lambda * std,
    });
    write_file(&out.join("blocks.csv"), &blocks)?;
    write_file(&out.join("score.json"), &serde_json::to_string_pretty(&score)?)?;
    print_json(&score)
}

pub fn report_mi(candidate: &Path, reference: &Path, out: &Path) -> Result<(), CliError> {
    let a = matrix_from_csv(&read(candidate)?)?;
    let b = matrix_from_csv(&read(reference)?)?;
    let err = mi_error(&a, &b)?;
    write_file(out, &matrix_to_csv(&err))?;
    let worst = err.iter().filter(|x| !x.is_nan()).fold(0.0f64, |m, x| m.max(*x));
    print_json(&json!({ "max_error": worst, "out": out }))
}
