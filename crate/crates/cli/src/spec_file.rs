//! Problem-specification file: a single JSON document validated before any
//! computation runs.

use hinfdelay::{DelayTransferFunction, FrequencyGrid, PlantSpec, WeightSpec};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub plant: PlantSection,
    pub weight: WeightSection,
    #[serde(default)]
    pub envelope: EnvelopeSection,
    #[serde(default)]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub checks: Checks,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub delay_h: f64,
    pub np_num: Vec<f64>,
    pub np_den: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    #[serde(default)]
    pub alpha1: Alpha1,
}

/// Either an explicit corner frequency or the `"auto"` sentinel.
#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(untagged)]
pub enum Alpha1 {
    #[default]
    #[serde(deserialize_with = "de_auto")]
    Auto,
    Fixed(f64),
}

fn de_auto<'de, D: serde::Deserializer<'de>>(d: D) -> Result<(), D::Error> {
    let s = String::deserialize(d)?;
    if s == "auto" {
        Ok(())
    } else {
        Err(serde::de::Error::custom(format!(
            "envelope.alpha1 must be a number or \"auto\", got \"{s}\""
        )))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points_per_decade: usize,
    pub linear_points_per_period: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub phase_residual: f64,
    pub grid_identity: f64,
    pub inner_check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            phase_residual: 1e-10,
            grid_identity: 1e-8,
            inner_check: 1e-9,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    pub k_max_encirclements: usize,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            k_max_encirclements: 20,
        }
    }
}

/// Validated inputs ready for the pipeline.
pub struct ValidatedSpec {
    pub plant: PlantSpec,
    pub weight: WeightSpec,
    pub alpha1: Alpha1,
    pub grid: FrequencyGrid,
    pub tolerances: Tolerances,
    pub checks: Checks,
}

/// Field-naming validation error (drives exit code 1).
#[derive(Debug)]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid spec field {}: {}", self.field, self.message)
    }
}

impl std::error::Error for ValidationError {}

fn finite_all(field: &str, xs: &[f64]) -> Result<(), ValidationError> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(ValidationError {
            field: field.into(),
            message: "all entries must be finite".into(),
        });
    }
    Ok(())
}

pub fn validate(spec: SpecFile) -> Result<ValidatedSpec, ValidationError> {
    let h = spec.plant.delay_h;
    if !h.is_finite() || h <= 0.0 {
        return Err(ValidationError {
            field: "plant.delay_h".into(),
            message: format!("must be positive and finite, got {h}"),
        });
    }
    finite_all("plant.np_num", &spec.plant.np_num)?;
    finite_all("plant.np_den", &spec.plant.np_den)?;
    finite_all(
        "weight.alpha/beta",
        &[spec.weight.alpha, spec.weight.beta],
    )?;
    if !(spec.weight.alpha > 0.0) {
        return Err(ValidationError {
            field: "weight.alpha".into(),
            message: "must be positive".into(),
        });
    }
    if !(spec.weight.beta > 0.0) {
        return Err(ValidationError {
            field: "weight.beta".into(),
            message: "must be positive".into(),
        });
    }
    let weight = WeightSpec::new(spec.weight.alpha, spec.weight.beta).map_err(|e| {
        ValidationError {
            field: "weight.alpha*beta".into(),
            message: e.to_string(),
        }
    })?;
    let np = DelayTransferFunction::rational(&spec.plant.np_num, &spec.plant.np_den).map_err(
        |e| ValidationError {
            field: "plant.np_den".into(),
            message: e.to_string(),
        },
    )?;
    let plant = PlantSpec::new(h, np).map_err(|e| ValidationError {
        field: "plant.np_num/np_den".into(),
        message: e.to_string(),
    })?;
    if let Alpha1::Fixed(a1) = spec.envelope.alpha1 {
        if !a1.is_finite() || a1 <= 0.0 {
            return Err(ValidationError {
                field: "envelope.alpha1".into(),
                message: format!("must be positive and finite, got {a1}"),
            });
        }
    }
    let grid = match &spec.grid {
        None => FrequencyGrid::for_delay(h),
        Some(g) => FrequencyGrid::new(
            g.omega_min,
            g.omega_max,
            g.points_per_decade,
            g.linear_points_per_period,
        )
        .map_err(|e| ValidationError {
            field: "grid".into(),
            message: e.to_string(),
        })?,
    };
    for (name, v) in [
        ("tolerances.phase_residual", spec.tolerances.phase_residual),
        ("tolerances.grid_identity", spec.tolerances.grid_identity),
        ("tolerances.inner_check", spec.tolerances.inner_check),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ValidationError {
                field: name.into(),
                message: format!("must be positive and finite, got {v}"),
            });
        }
    }
    if spec.checks.k_max_encirclements < 5 {
        return Err(ValidationError {
            field: "checks.k_max_encirclements".into(),
            message: "must be at least 5".into(),
        });
    }
    Ok(ValidatedSpec {
        plant,
        weight,
        alpha1: spec.envelope.alpha1,
        grid,
        tolerances: spec.tolerances,
        checks: spec.checks,
    })
}
