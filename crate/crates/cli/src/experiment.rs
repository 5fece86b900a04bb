//! Orchestration: build the problem a config describes, run the protocol,
//! verify the result, and write artifacts.
//!
//! Artifact layout per run directory: `config.json` (the exact config echo),
//! `trace.csv` (per-round, per-node measurements), `summary.json`
//! (machine-readable outcome, schema-stable), plus `model.json` for training
//! runs and `verify.json` after an explicit verification pass. All files are
//! written atomically (temp file + rename), and reruns of the same config
//! produce byte-identical bytes.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use coreset_consensus::{
    extract_classifier, fixed_point_check, load_points_csv, meb_oracle, oneclass_to_meb, predict,
    run_consensus, stream_rng, svdd_to_meb, svm2norm_to_meb, verify_epsilon, ActivityProcess,
    Classifier, ConsensusConfig, CoreSet, Error as CoreError, GraphProcess, Label, NodeState,
    PointId, PointSpace, RunOutcome, SolverConfig, StreamPurpose, SvmProblem, VerificationReport,
};
use serde::{Deserialize, Serialize};

use crate::config::{ActivitySpec, ExperimentConfig, GraphSpec, ProblemSpec};
use crate::datagen::sample_points;

/// A config turned into something the solver can run.
pub struct BuiltProblem {
    pub space: PointSpace,
    pub assignment: Vec<Vec<PointId>>,
    /// Present when the problem is a labeled SVM instance; training and
    /// classifier extraction need the raw problem, not just its lift.
    pub svm: Option<SvmProblem>,
}

fn round_robin(n_points: usize, nodes: Option<usize>) -> Result<Vec<Vec<PointId>>> {
    let n_nodes = nodes.unwrap_or(n_points);
    if n_nodes == 0 || n_nodes > n_points {
        bail!("cannot spread {n_points} points over {n_nodes} nodes");
    }
    let mut assignment = vec![Vec::new(); n_nodes];
    for i in 0..n_points {
        assignment[i % n_nodes].push(PointId(i));
    }
    Ok(assignment)
}

pub fn build_problem(config: &ExperimentConfig) -> Result<BuiltProblem> {
    match &config.problem {
        ProblemSpec::Random {
            nodes,
            dim,
            distribution,
            seed,
        } => {
            let mut rng = stream_rng(seed.unwrap_or(config.seed), StreamPurpose::Problem, 0);
            let points = sample_points(*nodes, *dim, *distribution, &mut rng);
            let space = PointSpace::explicit(points)?.with_cached_gram();
            Ok(BuiltProblem {
                assignment: round_robin(space.len(), None)?,
                space,
                svm: None,
            })
        }
        ProblemSpec::Svm {
            dataset,
            kernel,
            c,
            nodes,
        } => {
            let points = load_points_csv(dataset, true)
                .with_context(|| format!("loading labeled dataset {}", dataset.display()))?;
            let problem = SvmProblem::new(points, *kernel, *c)?;
            let space = svm2norm_to_meb(&problem)?.with_cached_gram();
            Ok(BuiltProblem {
                assignment: round_robin(space.len(), *nodes)?,
                space,
                svm: Some(problem),
            })
        }
        ProblemSpec::Svdd {
            dataset,
            kernel,
            nodes,
        } => {
            let points = load_points_csv(dataset, false)
                .with_context(|| format!("loading dataset {}", dataset.display()))?;
            let space = svdd_to_meb(points, *kernel)?.with_cached_gram();
            Ok(BuiltProblem {
                assignment: round_robin(space.len(), *nodes)?,
                space,
                svm: None,
            })
        }
        ProblemSpec::Oneclass {
            dataset,
            kernel,
            c,
            nodes,
        } => {
            let points = load_points_csv(dataset, false)
                .with_context(|| format!("loading dataset {}", dataset.display()))?;
            let space = oneclass_to_meb(points, *kernel, *c)?.with_cached_gram();
            Ok(BuiltProblem {
                assignment: round_robin(space.len(), *nodes)?,
                space,
                svm: None,
            })
        }
    }
}

fn graph_process(config: &ExperimentConfig, n: usize) -> Result<GraphProcess> {
    Ok(match &config.graph {
        GraphSpec::ErdosRenyi { p } => GraphProcess::erdos_renyi(n, *p, config.seed)?,
        GraphSpec::Ring => GraphProcess::fixed_ring(n)?,
        GraphSpec::File { path } => GraphProcess::from_schedule_file(path, n)
            .with_context(|| format!("loading schedule {}", path.display()))?,
    })
}

fn activity_process(config: &ExperimentConfig) -> Result<ActivityProcess> {
    Ok(match &config.activity {
        ActivitySpec::On => ActivityProcess::AlwaysOn,
        ActivitySpec::Bernoulli { q } => ActivityProcess::bernoulli(*q, config.seed)?,
    })
}

fn consensus_config(config: &ExperimentConfig) -> ConsensusConfig {
    ConsensusConfig {
        epsilon: config.epsilon,
        max_rounds: config.max_rounds,
        quiet_rounds: config.quiet_rounds,
        seed: config.seed,
        solver: SolverConfig::default(),
    }
}

pub struct ExecutedRun {
    pub built: BuiltProblem,
    pub outcome: RunOutcome,
    pub consensus: ConsensusConfig,
}

/// Builds and runs the experiment without touching the filesystem (beyond
/// reading any referenced dataset or schedule).
pub fn execute(config: &ExperimentConfig) -> Result<ExecutedRun> {
    let built = build_problem(config)?;
    let graph = graph_process(config, built.assignment.len())?;
    let activity = activity_process(config)?;
    let consensus = consensus_config(config);
    let outcome = run_consensus(&built.space, &built.assignment, &graph, &activity, &consensus)?;
    Ok(ExecutedRun {
        built,
        outcome,
        consensus,
    })
}

/// Machine-readable outcome of a run. Nullable fields stay present as
/// `null` so the schema is the same for every outcome kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub consensus_round: Option<u64>,
    pub rounds_run: u64,
    pub converged: bool,
    pub joint_window: Option<u64>,
    /// Squared radius of the agreed core-set's ball (null on timeout).
    pub r2_final: Option<f64>,
    /// Exact optimum from the reference oracle, when it could run.
    pub r_star2: Option<f64>,
    /// Farthest point's distance over the exact radius.
    pub eps_ratio: Option<f64>,
    pub verification_pass: Option<bool>,
    pub fixed_point_ok: Option<bool>,
    pub final_coreset: Option<Vec<usize>>,
    pub holdout_accuracy: Option<f64>,
    pub seed: u64,
    pub config: ExperimentConfig,
}

impl Summary {
    /// Process exit status: 0 success, 2 timeout, 3 verification failure.
    pub fn exit_code(&self) -> i32 {
        if !self.converged {
            2
        } else if self.verification_pass == Some(false) || self.fixed_point_ok == Some(false) {
            3
        } else {
            0
        }
    }

    /// One human line for the terminal.
    pub fn describe(&self) -> String {
        if !self.converged {
            return format!(
                "timeout: no agreement within {} rounds (agreement so far: {:?})",
                self.rounds_run, self.consensus_round
            );
        }
        let verdict = match self.verification_pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "unverified (no oracle for this instance)",
        };
        format!(
            "converged: agreement at round {}, {} rounds total, r2={}, eps ratio={} -> {}",
            self.consensus_round.unwrap_or(0),
            self.rounds_run,
            self.r2_final.unwrap_or(f64::NAN),
            self.eps_ratio.map_or("n/a".to_string(), |r| r.to_string()),
            verdict
        )
    }
}

/// Summarizes an executed run, including the oracle comparison and the
/// fixed-point audit when the run converged. The oracle is skipped (fields
/// stay null) when the instance is outside its feasible sizes.
pub fn summarize(config: &ExperimentConfig, run: &ExecutedRun) -> Result<Summary> {
    let all_ids: Vec<PointId> = run.built.space.ids().collect();
    let final_candidate = run.outcome.final_candidate();

    let mut r_star2 = None;
    let mut eps_ratio = None;
    let mut verification_pass = None;
    let mut fixed_point_ok = None;
    if let Some(candidate) = final_candidate {
        match meb_oracle(&run.built.space, &all_ids) {
            Ok(exact) => {
                let report = verify_epsilon(
                    &run.built.space,
                    candidate,
                    &all_ids,
                    config.epsilon,
                    Some(exact.r2()),
                )?;
                r_star2 = Some(report.r_star2);
                eps_ratio = Some(report.ratio);
                verification_pass = Some(report.pass);
            }
            Err(CoreError::UnsupportedSize(_)) => {}
            Err(e) => return Err(e.into()),
        }
        fixed_point_ok = Some(fixed_point_check(
            &run.built.space,
            &run.outcome.states,
            &run.consensus,
        )?);
    }

    Ok(Summary {
        consensus_round: run.outcome.trace.consensus_round,
        rounds_run: run.outcome.rounds_run,
        converged: run.outcome.converged,
        joint_window: run.outcome.joint_window,
        r2_final: final_candidate.map(|c| c.r2()),
        r_star2,
        eps_ratio,
        verification_pass,
        fixed_point_ok,
        final_coreset: final_candidate.map(|c| c.ids().iter().map(|id| id.index()).collect()),
        holdout_accuracy: None,
        seed: config.seed,
        config: config.clone(),
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_artifacts(
    out_dir: &Path,
    config: &ExperimentConfig,
    run: &ExecutedRun,
    summary: &Summary,
) -> Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    write_json(&out_dir.join("config.json"), config)?;
    let mut csv = Vec::new();
    run.outcome.trace.write_csv(&mut csv)?;
    write_atomic(&out_dir.join("trace.csv"), &csv)?;
    write_json(&out_dir.join("summary.json"), summary)?;
    Ok(())
}

/// The `run` subcommand: execute, summarize, persist.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<Summary> {
    let run = execute(config)?;
    let summary = summarize(config, &run)?;
    write_artifacts(out_dir, config, &run, &summary)?;
    Ok(summary)
}

fn decision_label(f: f64) -> Label {
    if f >= 0.0 {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// Fraction of `points` whose decision-value sign matches their label.
pub fn accuracy(classifier: &Classifier, points: &[coreset_consensus::RawPoint]) -> Result<f64> {
    if points.is_empty() {
        bail!("cannot score an empty dataset");
    }
    let mut correct = 0usize;
    for p in points {
        let label = p
            .label
            .with_context(|| format!("point {} has no label", p.id))?;
        if decision_label(predict(classifier, &p.x)?) == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / points.len() as f64)
}

/// The `train` subcommand: a labeled run that additionally exports the
/// recovered classifier and (optionally) scores it on holdout data.
pub fn train_experiment(
    config: &ExperimentConfig,
    holdout: Option<&Path>,
    out_dir: &Path,
) -> Result<(Summary, Option<Classifier>)> {
    if !matches!(config.problem, ProblemSpec::Svm { .. }) {
        bail!("train requires an svm problem (labeled dataset)");
    }
    let run = execute(config)?;
    let mut summary = summarize(config, &run)?;

    let mut model = None;
    if let Some(candidate) = run.outcome.final_candidate() {
        let problem = run.built.svm.as_ref().expect("svm problem built above");
        let classifier = extract_classifier(problem, candidate.ball())?;
        if let Some(holdout_path) = holdout {
            let holdout_points = load_points_csv(holdout_path, true)
                .with_context(|| format!("loading holdout {}", holdout_path.display()))?;
            summary.holdout_accuracy = Some(accuracy(&classifier, &holdout_points)?);
        }
        model = Some(classifier);
    }

    write_artifacts(out_dir, config, &run, &summary)?;
    if let Some(classifier) = &model {
        write_json(&out_dir.join("model.json"), classifier)?;
    }
    Ok((summary, model))
}

/// Outcome of re-verifying a recorded run.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutput {
    pub report: VerificationReport,
    pub fixed_point_ok: bool,
    pub pass: bool,
}

impl VerifyOutput {
    pub fn describe(&self) -> String {
        if self.pass {
            format!("PASS, ratio={} (bound {})", self.report.ratio, 1.0 + self.report.epsilon)
        } else if !self.report.pass {
            format!(
                "FAIL, ratio={} exceeds bound {}",
                self.report.ratio,
                1.0 + self.report.epsilon
            )
        } else {
            "FAIL, recorded state is not a fixed point".to_string()
        }
    }
}

/// The `verify` subcommand: reload a finished run's artifacts, rebuild the
/// problem deterministically, and re-check both the coverage guarantee and
/// the fixed-point property. `r_star2` overrides the oracle for instances
/// it cannot solve.
pub fn verify_run(out_dir: &Path, r_star2: Option<f64>) -> Result<VerifyOutput> {
    let config_path = out_dir.join("config.json");
    let summary_path = out_dir.join("summary.json");
    let config: ExperimentConfig = serde_json::from_str(
        &fs::read_to_string(&config_path)
            .with_context(|| format!("missing run artifact {}", config_path.display()))?,
    )?;
    let summary: Summary = serde_json::from_str(
        &fs::read_to_string(&summary_path)
            .with_context(|| format!("missing run artifact {}", summary_path.display()))?,
    )?;
    let ids = summary
        .final_coreset
        .context("run did not converge; there is no final core-set to verify")?;

    let built = build_problem(&config)?;
    let consensus = consensus_config(&config);
    let candidate = CoreSet::new(
        &built.space,
        ids.iter().map(|&i| PointId(i)).collect(),
        &consensus.solver,
    )?;
    let all_ids: Vec<PointId> = built.space.ids().collect();
    let report = verify_epsilon(&built.space, &candidate, &all_ids, config.epsilon, r_star2)
        .context("coverage check failed to run; for oracle-infeasible instances supply --r-star2")?;

    let states: Vec<NodeState> = built
        .assignment
        .iter()
        .enumerate()
        .map(|(i, local)| NodeState::with_candidate(i, local.clone(), candidate.clone()))
        .collect();
    let fixed_point_ok = fixed_point_check(&built.space, &states, &consensus)?;

    let output = VerifyOutput {
        pass: report.pass && fixed_point_ok,
        report,
        fixed_point_ok,
    };
    write_json(&out_dir.join("verify.json"), &output)?;
    Ok(output)
}
