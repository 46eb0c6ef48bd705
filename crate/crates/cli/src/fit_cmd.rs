use std::fs::{self, File};
use std::path::{Path, PathBuf};

use blinking::curve::CorrelationCurve;
use blinking::fitting::{fit_with, FitOptions, FitProblem, ModelFamily, ParamSpec};
use blinking::subsystem_optics::G2SineConstant;
use blinking::Error;
use clap::Args;

use crate::args::OutputArgs;
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Correlation data (CSV with tau, g and optional sigma columns).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Model family: dark_light or two_vsystems.
    #[arg(long)]
    pub family: Option<String>,
    /// Name of the data column holding g.
    #[arg(long)]
    pub column: Option<String>,
    /// Extra `key=value` settings; override the configuration file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Ordered settings where later entries replace earlier ones.
#[derive(Debug, Default)]
struct Settings {
    entries: Vec<(String, String)>,
}

impl Settings {
    fn insert(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value.to_string(),
            None => self.entries.push((key.to_string(), value.to_string())),
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn parse_line(line: &str, origin: &str) -> CliResult<Option<(String, String)>> {
    let body = line.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return Ok(None);
    }
    let (k, v) = body
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("{origin}: expected 'key = value', got '{body}'")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(CliError::Usage(format!("{origin}: empty key")));
    }
    Ok(Some((k.to_string(), v.to_string())))
}

fn parse_f64(key: &str, s: &str) -> CliResult<f64> {
    s.parse().map_err(|_| CliError::Usage(format!("{key}: '{s}' is not a number")))
}

/// `value` for a fixed parameter, `initial lower upper` for a free one.
fn param_spec(name: &str, value: &str) -> CliResult<ParamSpec> {
    let fields: Vec<&str> = value.split_whitespace().collect();
    match fields.as_slice() {
        [v] => Ok(ParamSpec::fixed(name, parse_f64(name, v)?)),
        [v, lo, hi] => Ok(ParamSpec::free(name, parse_f64(name, v)?, parse_f64(name, lo)?, parse_f64(name, hi)?)),
        _ => Err(CliError::Usage(format!("{name}: expected 'value' or 'initial lower upper', got '{value}'"))),
    }
}

fn family(name: &str, sine: Option<&str>) -> CliResult<ModelFamily> {
    match name {
        "dark_light" => {
            if sine.is_some() {
                return Err(CliError::Usage("sine_constant applies only to two_vsystems".into()));
            }
            Ok(ModelFamily::DarkLight)
        }
        "two_vsystems" => {
            let sine = match sine {
                None => G2SineConstant::Published,
                Some(s) => s.parse()?,
            };
            Ok(ModelFamily::TwoVSystems { sine })
        }
        other => Err(CliError::Usage(format!("unknown model family '{other}' (dark_light|two_vsystems)"))),
    }
}

const OPTION_KEYS: [&str; 5] = ["data", "family", "column", "sine_constant", "max_iterations"];

pub fn fit(a: &FitArgs) -> CliResult<()> {
    let mut settings = Settings::default();
    let mut base = PathBuf::new();
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        for (n, line) in text.lines().enumerate() {
            if let Some((k, v)) = parse_line(line, &format!("{}:{}", path.display(), n + 1))? {
                settings.insert(&k, &v);
            }
        }
        base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    }
    for s in &a.set {
        if let Some((k, v)) = parse_line(s, "--set")? {
            settings.insert(&k, &v);
        }
    }
    let data_path = match &a.data {
        Some(p) => p.clone(),
        None => base.join(settings.get("data").ok_or_else(|| CliError::Usage("no data file given".into()))?),
    };
    let family_name = a
        .family
        .as_deref()
        .or(settings.get("family"))
        .ok_or_else(|| CliError::Usage("no model family given".into()))?;
    let family = family(family_name, settings.get("sine_constant"))?;
    let column = a.column.as_deref().or(settings.get("column"));
    let mut opts = FitOptions::default();
    if let Some(m) = settings.get("max_iterations") {
        opts.max_iterations =
            m.parse().map_err(|_| CliError::Usage(format!("max_iterations: '{m}' is not an integer")))?;
    }
    let names = family.param_names();
    let mut params = Vec::new();
    for (k, v) in &settings.entries {
        if names.contains(k) || !OPTION_KEYS.contains(&k.as_str()) {
            params.push(param_spec(k, v)?);
        }
    }
    let file = File::open(&data_path).map_err(|e| CliError::Io(format!("{}: {e}", data_path.display())))?;
    let data = CorrelationCurve::read_csv(file, column)?;
    let problem = FitProblem::new(data, family, params)?;
    match fit_with(&problem, &opts) {
        Ok(res) => a.out.text(&format!("{}\n{}", res.report(), res.key_value_text())),
        Err(Error::NonConvergence { iterations, best }) => {
            eprint!("{}", best.report());
            Err(Error::NonConvergence { iterations, best }.into())
        }
        Err(e) => Err(e.into()),
    }
}
