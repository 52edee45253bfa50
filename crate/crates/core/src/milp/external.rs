use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::mps::{read_solution, write_mps};
use super::{check_solution, MilpError, MilpProblem, MilpSolution, MilpStatus, SolverOptions};

/// A solver run as a subprocess. `command` is split on whitespace; the
/// tokens `{mps}` and `{sol}` are replaced by the problem file to read and
/// the solution file to write.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExternalSolver {
    pub command: String,
    /// Largest accepted violation of the returned point.
    pub tolerance: f64,
}

impl ExternalSolver {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalSolver {
            command: command.into(),
            tolerance: 1e-6,
        }
    }
}

struct ScratchDir(PathBuf);

impl ScratchDir {
    fn new() -> Result<Self, MilpError> {
        static COUNTER: AtomicUsize = AtomicUsize::new(0);
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.subsec_nanos());
        let name = format!(
            "deepcycle-{}-{}-{nanos}",
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::Relaxed)
        );
        let path = std::env::temp_dir().join(name);
        std::fs::create_dir_all(&path).map_err(|e| MilpError::Io(e.to_string()))?;
        Ok(ScratchDir(path))
    }
}

impl Drop for ScratchDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

/// Hands `p` to the configured external solver via MPS and solution files,
/// then re-checks the returned point against every row and bound.
pub fn solve_external(p: &MilpProblem, opts: &SolverOptions) -> Result<MilpSolution, MilpError> {
    let solver = opts
        .external_solver
        .as_ref()
        .ok_or_else(|| MilpError::Config("no command given".into()))?;
    let template: Vec<&str> = solver.command.split_whitespace().collect();
    let Some((program, args)) = template.split_first() else {
        return Err(MilpError::Config("empty command".into()));
    };
    p.validate()?;
    let start = Instant::now();
    let dir = ScratchDir::new()?;
    let mps_path = dir.0.join("problem.mps");
    let sol_path = dir.0.join("problem.sol");
    std::fs::write(&mps_path, write_mps(p)).map_err(|e| MilpError::Io(e.to_string()))?;
    let subst = |a: &str| {
        a.replace("{mps}", &mps_path.to_string_lossy())
            .replace("{sol}", &sol_path.to_string_lossy())
    };
    let output = Command::new(program)
        .args(args.iter().map(|a| subst(a)))
        .output()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => MilpError::Config(format!("executable {program:?} not found")),
            _ => MilpError::Process(e.to_string()),
        })?;
    if !output.status.success() {
        return Err(MilpError::Process(format!(
            "{program} exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let text = std::fs::read_to_string(&sol_path)
        .map_err(|e| MilpError::Process(format!("no solution file written: {e}")))?;
    let status_line = text
        .lines()
        .find_map(|l| l.strip_prefix("# status "))
        .map(str::trim)
        .unwrap_or("");
    if status_line == "infeasible" {
        return Ok(MilpSolution {
            status: MilpStatus::Infeasible,
            x: None,
            objective: f64::INFINITY,
            bound: f64::INFINITY,
            gap: f64::INFINITY,
            nodes: 0,
            lp_iterations: 0,
            bound_trace: Vec::new(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let x = read_solution(p, &text)?;
    let report = check_solution(p, &x)?;
    if !report.passes(solver.tolerance) {
        return Err(MilpError::Rejected {
            max_violation: report.max_violation(),
            worst_row: report.worst_row,
            worst_column: report.worst_column,
        });
    }
    let status = if status_line == "optimal" {
        MilpStatus::Optimal
    } else {
        MilpStatus::Feasible
    };
    let objective = report.objective;
    Ok(MilpSolution {
        status,
        x: Some(x),
        objective,
        bound: if status == MilpStatus::Optimal { objective } else { f64::NEG_INFINITY },
        gap: if status == MilpStatus::Optimal { 0.0 } else { f64::INFINITY },
        nodes: 0,
        lp_iterations: 0,
        bound_trace: Vec::new(),
        seconds: start.elapsed().as_secs_f64(),
    })
}
