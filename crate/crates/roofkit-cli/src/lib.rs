//! Command implementations for the `roofkit` binary.
//!
//! Every command returns a [`RunRecord`] plus the text it prints, so the
//! same entry points drive both the binary and the integration tests. File
//! outputs embed the record (without wall time) as metadata, which keeps
//! them byte-identical for a fixed command line and seed.

use roofkit::{
    bifurcation_scan, brute_force_roof, circle_minima, convex_roof, facet_of, hexagon_ensemble,
    rank2_roof, symmetric_state, tilde_entropy, triangle_decomposition, verify_lemma,
    von_neumann_entropy, CMatrix, DensityMatrix, Error as RoofError, LemmaTag, OptimizerConfig,
    Transposition,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes: 0 ok, 2 usage/parse, 3 invalid input, 4 not applicable,
/// 5 verification failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    InvalidInput(String),
    NotApplicable(String),
    VerificationFailed(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::InvalidInput(_) => 3,
            CliError::NotApplicable(_) => 4,
            CliError::VerificationFailed(_) => 5,
            CliError::Io(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::InvalidInput(m)
            | CliError::NotApplicable(m)
            | CliError::VerificationFailed(m)
            | CliError::Io(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl std::error::Error for CliError {}

fn state_error(e: RoofError) -> CliError {
    match &e {
        RoofError::NonHermitianInput { .. } => {
            CliError::InvalidInput(format!("invariant violated (hermiticity): {e}"))
        }
        RoofError::InvalidTrace { .. } => {
            CliError::InvalidInput(format!("invariant violated (unit trace): {e}"))
        }
        RoofError::NegativeEigenvalue { .. } => {
            CliError::InvalidInput(format!("invariant violated (positive semidefiniteness): {e}"))
        }
        _ => CliError::InvalidInput(e.to_string()),
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------------------
// Configuration and run records
// ---------------------------------------------------------------------------

/// Flags shared by all subcommands.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConfigRecord {
    pub seed: u64,
    pub restarts: usize,
    pub iters: usize,
    pub ensemble_len: Option<usize>,
    pub tol: f64,
    pub threads: usize,
}

impl Default for ConfigRecord {
    fn default() -> Self {
        ConfigRecord {
            seed: 1,
            restarts: 32,
            iters: 2000,
            ensemble_len: None,
            tol: 1e-10,
            threads: 0,
        }
    }
}

impl ConfigRecord {
    pub fn optimizer(&self) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::default()
            .with_seed(self.seed)
            .with_restarts(self.restarts)
            .with_max_iters(self.iters)
            .with_threads(self.threads);
        cfg.conv_tol = self.tol;
        if let Some(m) = self.ensemble_len {
            cfg.ensemble_len = Some(m);
        }
        cfg
    }

    /// Apply the `ROOFKIT_THREADS` cap (0 = auto).
    pub fn with_env_threads(mut self) -> Self {
        if let Ok(value) = std::env::var("ROOFKIT_THREADS") {
            if let Ok(n) = value.trim().parse::<usize>() {
                self.threads = n;
            }
        }
        self
    }
}

/// Everything needed to reproduce and audit one command invocation.
/// Wall time is kept out of serialized output files so reruns are
/// byte-identical; it is reported on stderr instead.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config: ConfigRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_fingerprint: Option<String>,
    pub outputs: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    pub version: String,
}

impl RunRecord {
    fn new(command: &str, config: &ConfigRecord) -> Self {
        RunRecord {
            command: command.to_string(),
            config: config.clone(),
            input_fingerprint: None,
            outputs: serde_json::Value::Null,
            wall_time_ms: None,
            version: VERSION.to_string(),
        }
    }

    /// Serialized form embedded in output files: deterministic, no wall time.
    pub fn header_json(&self) -> String {
        let mut stripped = self.clone();
        stripped.wall_time_ms = None;
        serde_json::to_string(&stripped).expect("record serializes")
    }
}

/// FNV-1a of the raw input bytes, as a hex fingerprint.
pub fn fingerprint(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// 12 significant digits, scientific notation.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

// ---------------------------------------------------------------------------
// Matrix file format
// ---------------------------------------------------------------------------

/// Parse the density-matrix file format: `#` starts a comment, the first
/// token line holds `d`, then d lines of d entries `re` or `re±imj`.
pub fn parse_density_text(text: &str) -> CliResult<DensityMatrix> {
    let mut tokens: Vec<&str> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        tokens.extend(line.split_whitespace());
    }
    if tokens.is_empty() {
        return Err(CliError::Usage("empty matrix file".into()));
    }
    let dim: usize = tokens[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("first token `{}` is not a dimension", tokens[0])))?;
    if dim == 0 || dim > 64 {
        return Err(CliError::Usage(format!("dimension {dim} out of range 1..=64")));
    }
    let expected = 1 + dim * dim;
    if tokens.len() != expected {
        return Err(CliError::Usage(format!(
            "expected {} entries for d = {dim}, found {}",
            expected - 1,
            tokens.len() - 1
        )));
    }
    let mut matrix = CMatrix::zeros(dim, dim);
    for (idx, token) in tokens[1..].iter().enumerate() {
        let value = parse_complex(token)
            .ok_or_else(|| CliError::Usage(format!("cannot parse entry `{token}`")))?;
        matrix[(idx / dim, idx % dim)] = value;
    }
    DensityMatrix::from_matrix(matrix).map_err(state_error)
}

/// `re`, `re+imj`, `re-imj`, or `imj`.
fn parse_complex(token: &str) -> Option<num_complex::Complex64> {
    let token = token.trim();
    if let Some(stripped) = token.strip_suffix(['j', 'J']) {
        // split at the last +/- that is not an exponent sign or leading sign
        let bytes = stripped.as_bytes();
        for split in (1..bytes.len()).rev() {
            let c = bytes[split] as char;
            if (c == '+' || c == '-') && !matches!(bytes[split - 1] as char, 'e' | 'E') {
                let re: f64 = stripped[..split].parse().ok()?;
                let im: f64 = match &stripped[split..] {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                return Some(num_complex::Complex64::new(re, im));
            }
        }
        let im: f64 = stripped.parse().ok()?;
        return Some(num_complex::Complex64::new(0.0, im));
    }
    token
        .parse()
        .ok()
        .map(|re| num_complex::Complex64::new(re, 0.0))
}

/// Render a density matrix in the file format.
pub fn format_density(d: &DensityMatrix) -> String {
    let mut out = format!("{}\n", d.dim());
    for i in 0..d.dim() {
        let row: Vec<String> = (0..d.dim())
            .map(|j| {
                let z = d.entry(i, j);
                format!("{}{}{}j", fmt12(z.re), if z.im < 0.0 { "" } else { "+" }, fmt12(z.im))
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

pub struct CommandOutput {
    pub record: RunRecord,
    /// Human-readable report for stdout.
    pub text: String,
    /// Machine-readable file body, when the command produces one.
    pub file_body: Option<String>,
    /// Set when a verification suite reported failures; the caller exits 5
    /// after printing and writing the report.
    pub verification_failed: bool,
}

/// Compute S̃, S, R, H, the optimal ensemble, and the facet size for one
/// density matrix.
pub fn cmd_compute(input: &str, config: &ConfigRecord) -> CliResult<CommandOutput> {
    let started = Instant::now();
    let density = parse_density_text(input)?;
    let cfg = config.optimizer();
    let tilde = tilde_entropy(&density);
    let vn = von_neumann_entropy(&density);
    let roof = convex_roof(&density, &cfg).map_err(state_error)?;
    let entropy = tilde - roof.value;
    let facet = facet_of(&density, &cfg).map_err(state_error)?;

    let mut text = String::new();
    let _ = writeln!(text, "dimension      d = {}", density.dim());
    let _ = writeln!(text, "rank             = {}", density.rank());
    let _ = writeln!(text, "tilde entropy  S~ = {}", fmt12(tilde));
    let _ = writeln!(text, "von Neumann    S  = {}", fmt12(vn));
    let _ = writeln!(text, "convex roof    R  = {}", fmt12(roof.value));
    let _ = writeln!(text, "subalgebra     H  = {}", fmt12(entropy));
    let _ = writeln!(text, "facet size        = {}", facet.size());
    let _ = writeln!(
        text,
        "optimal ensemble ({} states, converged = {}):",
        roof.ensemble.len(),
        roof.converged
    );
    for (w, state) in roof.ensemble.weights().iter().zip(roof.ensemble.states()) {
        let comps: Vec<String> = state
            .amplitudes()
            .iter()
            .map(|z| format!("{}{}{}j", fmt12(z.re), if z.im < 0.0 { "" } else { "+" }, fmt12(z.im)))
            .collect();
        let _ = writeln!(text, "  p = {}  |psi> = [{}]", fmt12(*w), comps.join(", "));
    }

    let ensemble_json: Vec<serde_json::Value> = roof
        .ensemble
        .weights()
        .iter()
        .zip(roof.ensemble.states())
        .map(|(w, s)| {
            serde_json::json!({
                "weight": w,
                "state": s.amplitudes().iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
            })
        })
        .collect();

    let mut record = RunRecord::new("compute", config);
    record.input_fingerprint = Some(fingerprint(input.as_bytes()));
    record.outputs = serde_json::json!({
        "dim": density.dim(),
        "rank": density.rank(),
        "tilde_entropy": tilde,
        "von_neumann_entropy": vn,
        "convex_roof": roof.value,
        "subalgebra_entropy": entropy,
        "facet_size": facet.size(),
        "converged": roof.converged,
        "restarts_used": roof.restarts_used,
        "ensemble": ensemble_json,
    });
    record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    let file_body = Some(format!("{}\n", record.header_json()));
    Ok(CommandOutput {
        record,
        text,
        file_body,
        verification_failed: false,
    })
}

/// Scan the symmetric family over a z-range: closed-form decompositions,
/// the unrestricted optimizer, minima census, and the bifurcation value.
pub fn cmd_scan(
    dim: usize,
    z_lo: f64,
    z_hi: f64,
    steps: usize,
    config: &ConfigRecord,
) -> CliResult<CommandOutput> {
    let started = Instant::now();
    if dim != 3 {
        return Err(CliError::Usage(format!(
            "scan supports d = 3 (got d = {dim}); use `compute` for other states"
        )));
    }
    if steps < 2 {
        return Err(CliError::Usage("need at least 2 steps".into()));
    }
    let cfg = config.optimizer();
    let mut rows: Vec<serde_json::Value> = Vec::new();
    let mut csv = String::new();
    let mut record = RunRecord::new("scan", config);
    let _ = writeln!(csv, "z,a,r,tildeS,R_triangle,R_hexagon,R_opt,H,minima");

    for i in 0..steps {
        let z = z_lo + (z_hi - z_lo) * i as f64 / (steps - 1) as f64;
        let state = symmetric_state(dim, z).map_err(state_error)?;
        let density = state.density();
        let tilde = tilde_entropy(&density);
        let triangle = triangle_decomposition(&state).map_err(state_error)?.objective();
        let minima = circle_minima(z, 720).map_err(state_error)?.len();
        let hexagon = if minima == 6 {
            Some(hexagon_ensemble(z, 720).map_err(state_error)?.objective_a)
        } else {
            None
        };
        let mut per_z = cfg.clone();
        per_z.seed = cfg.seed.wrapping_add(i as u64);
        let optimum = convex_roof(&density, &per_z).map_err(state_error)?.value;
        let best = hexagon.map_or(triangle, |h| h.min(triangle)).min(optimum);
        let entropy = tilde - best;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            fmt12(z),
            fmt12(state.a()),
            fmt12(state.r()),
            fmt12(tilde),
            fmt12(triangle),
            hexagon.map(fmt12).unwrap_or_default(),
            fmt12(optimum),
            fmt12(entropy),
            minima
        );
        rows.push(serde_json::json!({
            "z": z,
            "a": state.a(),
            "r": state.r(),
            "tildeS": tilde,
            "R_triangle": triangle,
            "R_hexagon": hexagon,
            "R_opt": optimum,
            "H": entropy,
            "minima": minima,
        }));
    }

    // bifurcation refinement over the interior of the scanned range
    let lo = z_lo.max(-1.0 / 6.0 + 1e-3);
    let hi = z_hi.min(1.0 / 3.0 - 1e-3);
    let z_star = bifurcation_scan(lo, hi, 60, 1e-6).ok();
    match z_star {
        Some(z) => {
            let _ = writeln!(csv, "# z_star,{}", fmt12(z));
        }
        None => {
            let _ = writeln!(csv, "# z_star,");
        }
    }

    record.outputs = serde_json::json!({
        "dim": dim,
        "z_lo": z_lo,
        "z_hi": z_hi,
        "steps": steps,
        "z_star": z_star,
        "rows": rows,
    });
    let header = record.header_json();
    let file_body = format!("# roofkit scan\n# record: {header}\n{csv}");

    let mut text = String::new();
    let _ = writeln!(text, "scanned {steps} points over z in [{z_lo}, {z_hi}]");
    match z_star {
        Some(z) => {
            let _ = writeln!(text, "bifurcation value z* = {}", fmt12(z));
        }
        None => {
            let _ = writeln!(text, "no bifurcation inside the scanned range");
        }
    }
    record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    Ok(CommandOutput {
        record,
        text,
        file_body: Some(file_body),
        verification_failed: false,
    })
}

/// Closed-form solution for a rank-two transposition-symmetric state, with
/// the brute-force gap.
pub fn cmd_rank2(
    input: &str,
    swap: (usize, usize),
    config: &ConfigRecord,
) -> CliResult<CommandOutput> {
    let started = Instant::now();
    let density = parse_density_text(input)?;
    let (i, j) = swap;
    if i >= j || j >= density.dim() {
        return Err(CliError::Usage(format!(
            "swap indices ({i}, {j}) invalid for d = {}",
            density.dim()
        )));
    }
    let t = Transposition::new(density.dim(), i, j).map_err(state_error)?;
    let solution = rank2_roof(&density, &t).map_err(|e| match e {
        RoofError::RankMismatch { expected, found } => CliError::NotApplicable(format!(
            "not applicable: rank is {found}, the closed form needs rank {expected}"
        )),
        RoofError::NotSymmetric { deviation } => CliError::NotApplicable(format!(
            "not applicable: state does not commute with the swap (deviation {deviation:.3e})"
        )),
        RoofError::DegenerateFrame { y } => CliError::NotApplicable(format!(
            "not applicable: the swap acts trivially on the support (y = {y:.3e})"
        )),
        RoofError::DegenerateTrace { purity } => CliError::NotApplicable(format!(
            "not applicable: state is pure (Tr D^2 = {purity})"
        )),
        other => state_error(other),
    })?;
    let oracle_value = brute_force_roof(&density, 4, 1000, config.seed);
    let gap = solution.r_value - oracle_value;

    let mut text = String::new();
    let _ = writeln!(text, "swap              = ({i}, {j})");
    let _ = writeln!(text, "x1                = {}", fmt12(solution.x1));
    let _ = writeln!(text, "x3                = {}", fmt12(solution.x3));
    let _ = writeln!(text, "y                 = {}", fmt12(solution.y));
    let _ = writeln!(text, "convex roof    R  = {}", fmt12(solution.r_value));
    let _ = writeln!(text, "subalgebra     H  = {}", fmt12(solution.h_value));
    let _ = writeln!(text, "oracle value      = {}", fmt12(oracle_value));
    let _ = writeln!(text, "oracle gap        = {}", fmt12(gap));
    for (label, state) in [("rho", &solution.optimal_pair.0), ("rho^U", &solution.optimal_pair.1)] {
        let comps: Vec<String> = state
            .amplitudes()
            .iter()
            .map(|z| format!("{}{}{}j", fmt12(z.re), if z.im < 0.0 { "" } else { "+" }, fmt12(z.im)))
            .collect();
        let _ = writeln!(text, "  {label} = [{}]", comps.join(", "));
    }

    let mut record = RunRecord::new("rank2", config);
    record.input_fingerprint = Some(fingerprint(input.as_bytes()));
    record.outputs = serde_json::json!({
        "swap": [i, j],
        "x1": solution.x1,
        "x3": solution.x3,
        "y": solution.y,
        "convex_roof": solution.r_value,
        "subalgebra_entropy": solution.h_value,
        "oracle_value": oracle_value,
        "oracle_gap": gap,
    });
    record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    let file_body = Some(format!("{}\n", record.header_json()));
    Ok(CommandOutput {
        record,
        text,
        file_body,
        verification_failed: false,
    })
}

/// Run one lemma suite (or all of them) and report PASS/FAIL per check.
pub fn cmd_verify(suite: &str, config: &ConfigRecord) -> CliResult<CommandOutput> {
    let started = Instant::now();
    let tags: Vec<LemmaTag> = if suite.eq_ignore_ascii_case("all") {
        LemmaTag::ALL.to_vec()
    } else {
        vec![LemmaTag::from_str(suite).map_err(|e| CliError::Usage(e.to_string()))?]
    };
    let cfg = config.optimizer();
    let mut text = String::new();
    let mut checks_json: Vec<serde_json::Value> = Vec::new();
    let mut all_pass = true;
    for tag in tags {
        let report = verify_lemma(tag, &cfg, config.seed).map_err(state_error)?;
        all_pass &= report.pass;
        let _ = writeln!(
            text,
            "suite {:<5} {}  ({} checks, seed {})",
            report.tag,
            if report.pass { "PASS" } else { "FAIL" },
            report.checks.len(),
            report.seed
        );
        for check in &report.checks {
            let _ = writeln!(
                text,
                "  [{}] {:<58} target {:>17} vs {:>17} (tol {:.1e})",
                if check.pass { "pass" } else { "FAIL" },
                check.name,
                fmt12(check.target),
                fmt12(check.oracle),
                check.tolerance
            );
            checks_json.push(serde_json::json!({
                "tag": report.tag,
                "check": check.name,
                "pass": check.pass,
                "gap": check.gap,
                "tolerance": check.tolerance,
                "seed": report.seed,
                "samples": report.samples,
            }));
        }
    }

    let mut record = RunRecord::new("verify", config);
    record.outputs = serde_json::json!({
        "suite": suite,
        "pass": all_pass,
        "checks": checks_json,
    });
    record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    let file_body = Some(format!("{}\n", record.header_json()));
    Ok(CommandOutput {
        record,
        text,
        file_body,
        verification_failed: !all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_token_forms() {
        assert_eq!(parse_complex("0.5").unwrap(), num_complex::Complex64::new(0.5, 0.0));
        assert_eq!(
            parse_complex("0.5+0.25j").unwrap(),
            num_complex::Complex64::new(0.5, 0.25)
        );
        assert_eq!(
            parse_complex("-1e-3-2e-4j").unwrap(),
            num_complex::Complex64::new(-1e-3, -2e-4)
        );
        assert_eq!(parse_complex("0.7j").unwrap(), num_complex::Complex64::new(0.0, 0.7));
        assert!(parse_complex("abc").is_none());
    }

    #[test]
    fn parse_rejects_bad_files() {
        assert!(matches!(parse_density_text(""), Err(CliError::Usage(_))));
        assert!(matches!(
            parse_density_text("2\n1 0 0"),
            Err(CliError::Usage(_))
        ));
        // trace violation is an input error, not a parse error
        let text = "2\n0.6 0\n0 0.6\n";
        assert!(matches!(
            parse_density_text(text),
            Err(CliError::InvalidInput(_))
        ));
    }

    #[test]
    fn density_round_trip() {
        let d = DensityMatrix::maximally_mixed(3);
        let text = format_density(&d);
        let parsed = parse_density_text(&text).unwrap();
        assert!(parsed.max_abs_diff(&d) < 1e-11);
    }

    #[test]
    fn record_round_trip_is_lossless() {
        let mut record = RunRecord::new("compute", &ConfigRecord::default());
        record.input_fingerprint = Some("00ff".into());
        record.outputs = serde_json::json!({"convex_roof": 0.123_456_789_012_345_68});
        record.wall_time_ms = Some(17.25);
        let json = serde_json::to_string(&record).unwrap();
        let back: RunRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.command, record.command);
        assert_eq!(back.config, record.config);
        assert_eq!(back.input_fingerprint, record.input_fingerprint);
        assert_eq!(back.outputs, record.outputs);
        assert_eq!(back.wall_time_ms, record.wall_time_ms);
        assert_eq!(json, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(fingerprint(b"roofkit"), fingerprint(b"roofkit"));
        assert_ne!(fingerprint(b"roofkit"), fingerprint(b"roofkit "));
    }
}
