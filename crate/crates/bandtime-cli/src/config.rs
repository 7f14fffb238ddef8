//! Flat dotted-key run configuration: one authoritative schema with the
//! reference-model defaults, overridable from a config file and repeated
//! `--set key=value` flags.

use std::fmt;
use std::path::{Path, PathBuf};

use bandtime::arrival::{GaugeKind, Scenario};
use bandtime::band::BandGrid;
use bandtime::scattering::PotentialSpec;
use bandtime::timeop::DistributionOptions;
use bandtime::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeChoice {
    Constant,
    SpatialArrival,
}

impl fmt::Display for GaugeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GaugeChoice::Constant => "constant",
            GaugeChoice::SpatialArrival => "spatial_arrival",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lambda: f64,
    pub a: f64,
    pub u: f64,
    pub eps0: f64,
    pub delta_eps: f64,
    pub n_grid: usize,
    pub x_r: f64,
    pub t0: f64,
    pub gauge: GaugeChoice,
    pub x0: f64,
    pub tail_tol: f64,
    pub m_cap: i64,
    pub ode_step: f64,
    pub directory: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lambda: 1.0,
            a: 10.0,
            u: 0.3,
            eps0: 0.2,
            delta_eps: 0.4,
            n_grid: 1601,
            x_r: 100.0,
            t0: 0.0,
            gauge: GaugeChoice::Constant,
            x0: 0.0,
            tail_tol: 1e-3,
            m_cap: 1 << 14,
            ode_step: 1e-3,
            directory: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::validation(format!("{key}: cannot parse '{value}' as a number")))?;
    if !v.is_finite() {
        return Err(Error::validation(format!("{key}: value must be finite")));
    }
    Ok(v)
}

impl RunConfig {
    /// Apply one dotted-key override.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "potential.lambda" => self.lambda = parse_f64(key, value)?,
            "potential.a" => self.a = parse_f64(key, value)?,
            "potential.u" => self.u = parse_f64(key, value)?,
            "band.eps0" => self.eps0 = parse_f64(key, value)?,
            "band.delta_eps" => self.delta_eps = parse_f64(key, value)?,
            "band.n_grid" => {
                self.n_grid = value.parse().map_err(|_| {
                    Error::validation(format!("band.n_grid: cannot parse '{value}'"))
                })?
            }
            "arrival.x_r" => self.x_r = parse_f64(key, value)?,
            "arrival.t0" => self.t0 = parse_f64(key, value)?,
            "arrival.gauge" => {
                self.gauge = match value {
                    "constant" => GaugeChoice::Constant,
                    "spatial_arrival" => GaugeChoice::SpatialArrival,
                    other => {
                        return Err(Error::validation(format!(
                            "arrival.gauge: unknown gauge '{other}' (constant | spatial_arrival)"
                        )))
                    }
                }
            }
            "arrival.x0" => self.x0 = parse_f64(key, value)?,
            "numerics.tail_tol" => self.tail_tol = parse_f64(key, value)?,
            "numerics.m_cap" => {
                self.m_cap = value.parse().map_err(|_| {
                    Error::validation(format!("numerics.m_cap: cannot parse '{value}'"))
                })?
            }
            "numerics.ode_step" => self.ode_step = parse_f64(key, value)?,
            "output.directory" => self.directory = PathBuf::from(value),
            "output.format" => {
                self.format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => {
                        return Err(Error::validation(format!(
                            "output.format: unknown format '{other}' (csv | json)"
                        )))
                    }
                }
            }
            other => {
                return Err(Error::validation(format!(
                    "unknown configuration key '{other}'"
                )))
            }
        }
        Ok(())
    }

    /// Load defaults, then the config file (if any), then the --set
    /// overrides, then the --out override.
    pub fn load(
        path: Option<&Path>,
        sets: &[String],
        out_dir: Option<&Path>,
    ) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::validation(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::validation(format!(
                        "{}:{}: expected 'key = value'",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                config.apply(key, value)?;
            }
        }
        for set in sets {
            let (key, value) = set.split_once('=').ok_or_else(|| {
                Error::validation(format!("--set '{set}': expected key=value"))
            })?;
            config.apply(key, value)?;
        }
        if let Some(dir) = out_dir {
            config.directory = dir.to_path_buf();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.band()?;
        self.potential()?;
        if !(self.tail_tol > 0.0 && self.tail_tol < 0.5) {
            return Err(Error::validation(format!(
                "numerics.tail_tol must lie in (0, 0.5), got {}",
                self.tail_tol
            )));
        }
        if self.m_cap < 1 {
            return Err(Error::validation("numerics.m_cap must be positive"));
        }
        if !(self.ode_step > 0.0 && self.ode_step.is_finite()) {
            return Err(Error::validation("numerics.ode_step must be positive"));
        }
        if !self.x_r.is_finite() || !self.t0.is_finite() || !self.x0.is_finite() {
            return Err(Error::validation("arrival parameters must be finite"));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        if self.lambda == 0.0 && self.u == 0.0 {
            return Ok(PotentialSpec::free());
        }
        PotentialSpec::double_delta_barrier(self.lambda, self.a, self.u)
    }

    pub fn band(&self) -> Result<BandGrid> {
        BandGrid::new(self.eps0, self.delta_eps, self.n_grid)
    }

    pub fn distribution_options(&self) -> DistributionOptions {
        DistributionOptions {
            tail_tol: self.tail_tol,
            m_cap: self.m_cap,
        }
    }

    pub fn gauge_kind(&self) -> GaugeKind {
        match self.gauge {
            GaugeChoice::Constant => GaugeKind::Constant,
            GaugeChoice::SpatialArrival => GaugeKind::SpatialArrival { x0: self.x0 },
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(
            self.potential()?,
            self.band()?,
            self.x_r,
            self.t0,
            self.gauge_kind(),
            self.distribution_options(),
        )
    }

    /// Scenario with a different interior height (sweep points).
    pub fn scenario_with_u(&self, u: f64) -> Result<Scenario> {
        let mut cfg = self.clone();
        cfg.u = u;
        cfg.scenario()
    }

    /// Deterministically ordered key/value echo for the run manifest.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        vec![
            ("potential.lambda".into(), format!("{}", self.lambda)),
            ("potential.a".into(), format!("{}", self.a)),
            ("potential.u".into(), format!("{}", self.u)),
            ("band.eps0".into(), format!("{}", self.eps0)),
            ("band.delta_eps".into(), format!("{}", self.delta_eps)),
            ("band.n_grid".into(), format!("{}", self.n_grid)),
            ("arrival.x_r".into(), format!("{}", self.x_r)),
            ("arrival.t0".into(), format!("{}", self.t0)),
            ("arrival.gauge".into(), format!("{}", self.gauge)),
            ("arrival.x0".into(), format!("{}", self.x0)),
            ("numerics.tail_tol".into(), format!("{}", self.tail_tol)),
            ("numerics.m_cap".into(), format!("{}", self.m_cap)),
            ("numerics.ode_step".into(), format!("{}", self.ode_step)),
            (
                "output.directory".into(),
                self.directory.display().to_string(),
            ),
            ("output.format".into(), format!("{}", self.format)),
        ]
    }
}
