//! Command-line surface and the flat JSON `--config` file.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const COMMANDS: [&str; 5] = ["machine", "singlet", "chsh", "paradox", "dynamics"];

#[derive(Debug, Parser, Serialize)]
#[command(name = "qmlab", version, about = "Elastic-sphere spin model experiments", args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    #[serde(rename = "subcommand")]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Monte-Carlo samples; 0 runs the analytic computation only.
    #[arg(long, global = true, default_value_t = 0)]
    pub samples: u64,
    /// Seed of the random stream; required when --samples > 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Omit the timestamp so identical runs give identical bytes.
    #[arg(long, global = true)]
    pub reproducible: bool,
    /// Read every angle in degrees.
    #[arg(long, global = true)]
    pub deg: bool,
    /// Sampling shards (defaults to one per worker thread; results do not depend on it).
    #[arg(long, global = true)]
    pub shards: Option<usize>,
    /// Flat JSON object of flag values, e.g. {"command": "machine", "theta": 1.0}.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Single machine: analytic, trace-rule and sampled probabilities.
    Machine(MachineArgs),
    /// Rod model at the singlet preparation.
    Singlet(SingletArgs),
    /// CHSH combination of rod-model correlations.
    Chsh(ChshArgs),
    /// Reduced states versus joint state: singlet against product of centers.
    Paradox(ParadoxArgs),
    /// Mixture lift against pure lift under an evolution.
    Dynamics(DynamicsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Machine(_) => "machine",
            Command::Singlet(_) => "singlet",
            Command::Chsh(_) => "chsh",
            Command::Paradox(_) => "paradox",
            Command::Dynamics(_) => "dynamics",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MachineArgs {
    /// Polar angle of the decomposition axis v.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["x", "y", "z", "center"])]
    pub theta: Option<f64>,
    /// Azimuth of v.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub phi: f64,
    /// Weight on v (the weight on −v is 1 − a).
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "center")]
    pub x: Option<f64>,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "center")]
    pub y: Option<f64>,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "center")]
    pub z: Option<f64>,
    /// The center of the ball.
    #[arg(long)]
    pub center: bool,
    /// Polar angle of the measurement direction u.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub u_theta: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub u_phi: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SingletArgs {
    /// Angle between the two directions (u1 = +z, u2 in the x-z plane).
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["u1_theta", "u2_theta"])]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub u1_theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub u1_phi: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub u2_theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub u2_phi: f64,
    /// Also sweep α over [0, π] in this many steps.
    #[arg(long)]
    pub sweep: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChshArgs {
    /// Maximize |S| over a grid of coplanar settings.
    #[arg(long, conflicts_with = "angles")]
    pub optimal: bool,
    /// Coplanar angles a a′ b b′ from +z in the x-z plane.
    #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["A", "A_PRIME", "B", "B_PRIME"])]
    pub angles: Option<Vec<f64>>,
    /// Grid resolution per angle for --optimal.
    #[arg(long, default_value_t = 48)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ParadoxArgs {
    /// Number of α steps over [0, π].
    #[arg(long, default_value_t = 36)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Unitary,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisArg {
    X,
    Y,
    Z,
    #[value(name = "-x")]
    #[serde(rename = "-x")]
    MinusX,
    #[value(name = "-y")]
    #[serde(rename = "-y")]
    MinusY,
    #[value(name = "-z")]
    #[serde(rename = "-z")]
    MinusZ,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DynamicsArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Nonlinear)]
    pub kind: KindArg,
    /// Generator as a Pauli axis.
    #[arg(long, value_enum, allow_hyphen_values = true, default_value_t = AxisArg::Z, conflicts_with = "hamiltonian")]
    pub generator: AxisArg,
    /// Generator [[h00, h01], [conj h01, h11]] given as h00 re(h01) im(h01) h11.
    #[arg(long, num_args = 4, allow_negative_numbers = true, value_names = ["H00", "RE_H01", "IM_H01", "H11"])]
    pub hamiltonian: Option<Vec<f64>>,
    /// Decomposition axis as a coordinate direction.
    #[arg(long, value_enum, allow_hyphen_values = true, conflicts_with = "axis_theta")]
    pub axis: Option<AxisArg>,
    /// Decomposition axis polar angle.
    #[arg(long, allow_negative_numbers = true)]
    pub axis_theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub axis_phi: f64,
    /// Weight on the axis ray.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    /// Initial ball point, decomposed canonically when no axis is given.
    #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["X", "Y", "Z"])]
    pub point: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2.0)]
    pub t_max: f64,
    /// Number of time steps on [0, t_max].
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Reweight mixture branches by their evolved norms.
    #[arg(long)]
    pub reweighted_mixture: bool,
}

/// Finds `--config PATH` (or `--config=PATH`) in the raw arguments.
fn config_path(args: &[OsString]) -> Option<(usize, usize, PathBuf)> {
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return args.get(i + 1).map(|p| (i, 2, PathBuf::from(p)));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some((i, 1, PathBuf::from(p)));
        }
    }
    None
}

fn scalar_token(key: &str, v: &serde_json::Value) -> anyhow::Result<String> {
    match v {
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::String(s) => Ok(s.clone()),
        other => bail!("config key {key:?}: unsupported value {other}"),
    }
}

/// Turns a flat JSON object into flag tokens. Booleans become bare flags,
/// arrays become multi-value flags, `null` and `false` are skipped.
pub fn config_tokens(text: &str) -> anyhow::Result<(Option<String>, Vec<OsString>)> {
    let value: serde_json::Value = serde_json::from_str(text).context("config is not valid JSON")?;
    let obj = value.as_object().context("config must be a JSON object")?;
    let mut command = None;
    let mut tokens = Vec::new();
    for (key, v) in obj {
        if key == "command" {
            command = Some(v.as_str().context("config \"command\" must be a string")?.to_string());
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            serde_json::Value::Null | serde_json::Value::Bool(false) => {}
            serde_json::Value::Bool(true) => tokens.push(flag.into()),
            serde_json::Value::Array(items) => {
                tokens.push(flag.into());
                for item in items {
                    tokens.push(scalar_token(key, item)?.into());
                }
            }
            other => {
                tokens.push(flag.into());
                tokens.push(scalar_token(key, other)?.into());
            }
        }
    }
    Ok((command, tokens))
}

/// Expands `--config` into ordinary arguments. Config values are placed
/// right after the subcommand, so flags given on the command line win.
pub fn expand_config(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some((at, len, path)) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let (command, tokens) = config_tokens(&text)?;
    let mut rest: Vec<OsString> = args.clone();
    rest.drain(at..at + len);
    let sub_at = rest
        .iter()
        .skip(1)
        .position(|a| COMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map(|p| p + 1);
    match (sub_at, command) {
        (Some(i), cmd) => {
            if let Some(cmd) = cmd {
                if rest[i].to_string_lossy() != cmd {
                    bail!("config command {cmd:?} conflicts with {:?}", rest[i]);
                }
            }
            // later occurrences win, so the user's own flags go last
            let before: Vec<OsString> = rest.drain(1..i).collect();
            let after = rest.split_off(2);
            rest.extend(tokens);
            rest.extend(before);
            rest.extend(after);
        }
        (None, Some(cmd)) => {
            let mut head = vec![rest[0].clone(), cmd.into()];
            head.extend(tokens);
            head.extend(rest.into_iter().skip(1));
            rest = head;
        }
        (None, None) => bail!("config has no \"command\" and none was given"),
    }
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_tokens_flatten() {
        let (cmd, toks) =
            config_tokens(r#"{"command":"chsh","angles":[0,0,0,0],"reproducible":true,"deg":false,"seed":3}"#)
                .unwrap();
        assert_eq!(cmd.as_deref(), Some("chsh"));
        let toks: Vec<String> = toks.iter().map(|t| t.to_string_lossy().into_owned()).collect();
        assert!(toks.windows(5).any(|w| w == ["--angles", "0", "0", "0", "0"]));
        assert!(toks.contains(&"--reproducible".to_string()));
        assert!(!toks.contains(&"--deg".to_string()));
        assert!(toks.windows(2).any(|w| w == ["--seed", "3"]));
    }

    #[test]
    fn config_rejects_nested_objects() {
        assert!(config_tokens(r#"{"theta":{"x":1}}"#).is_err());
        assert!(config_tokens("[1,2]").is_err());
    }

    #[test]
    fn expand_inserts_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"command":"machine","theta":0.5}"#).unwrap();
        let p = path.to_string_lossy().into_owned();

        let out = expand_config(os(&["qmlab", "--config", &p, "--samples", "0"])).unwrap();
        let out: Vec<String> = out.iter().map(|t| t.to_string_lossy().into_owned()).collect();
        assert_eq!(out, ["qmlab", "machine", "--theta", "0.5", "--samples", "0"]);

        let out = expand_config(os(&["qmlab", "machine", &format!("--config={p}")])).unwrap();
        let out: Vec<String> = out.iter().map(|t| t.to_string_lossy().into_owned()).collect();
        assert_eq!(out, ["qmlab", "machine", "--theta", "0.5"]);

        assert!(expand_config(os(&["qmlab", "singlet", "--config", &p])).is_err());

        let out = expand_config(os(&["qmlab", "--seed", "2", "machine", "--config", &p, "--a", "1"])).unwrap();
        let out: Vec<String> = out.iter().map(|t| t.to_string_lossy().into_owned()).collect();
        assert_eq!(out, ["qmlab", "machine", "--theta", "0.5", "--seed", "2", "--a", "1"]);
    }

    #[test]
    fn later_flags_override() {
        let cli = Cli::try_parse_from(["qmlab", "machine", "--theta", "0.5", "--seed", "1", "--theta", "0.25", "--seed", "2"])
            .unwrap();
        assert_eq!(cli.global.seed, Some(2));
        match cli.command {
            Command::Machine(m) => assert_eq!(m.theta, Some(0.25)),
            _ => unreachable!(),
        }
    }
}
