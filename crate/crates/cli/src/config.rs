//! Configuration, cylinder specifications and elementary tables as JSON.

use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use tropcyl_core::{
    build_model, lift_profile, validate_fan, Anchors, ElementaryCountTable, IntersectionProfile,
    LatticeVector, Point, PrimitiveCylinder, ToricModel, WallRule, Q,
};

use crate::error::CliError;

/// A rational number written as an integer or as a string `"a/b"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational(pub Q);

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            s.serialize_i64(*self.0.numer())
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Rational(Q::from_integer(n))),
            Raw::Str(s) => parse_rational(&s)
                .map(Rational)
                .map_err(serde::de::Error::custom),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Q, String> {
    let bad = || format!("`{s}` is not a rational number");
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (
            n.trim().parse::<i64>().map_err(|_| bad())?,
            d.trim().parse::<i64>().map_err(|_| bad())?,
        ),
        None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
    };
    if d == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(n, d))
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub walls: WallsConfig,
    #[serde(default)]
    pub anchors: AnchorsConfig,
    #[serde(default)]
    pub render: RenderConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub fan: FanConfig,
    pub blowups: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanConfig {
    pub rays: Vec<LatticeVector>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WallsConfig {
    pub steps: usize,
    pub norm_bound: i64,
    pub rule: WallRule,
}

impl Default for WallsConfig {
    fn default() -> Self {
        Self {
            steps: 4,
            norm_bound: 10,
            rule: WallRule::PairSum,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnchorsConfig {
    pub g: Rational,
    pub t: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interior: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interior_prime: Option<Rational>,
}

impl Default for AnchorsConfig {
    fn default() -> Self {
        Self {
            g: Rational(Q::from_integer(1)),
            t: Rational(Q::from_integer(2)),
            interior: None,
            interior_prime: None,
        }
    }
}

impl AnchorsConfig {
    pub fn anchors(&self) -> Anchors {
        Anchors {
            g: self.g.0,
            t: self.t.0,
            interior: self.interior.map(|r| r.0),
            interior_prime: self.interior_prime.map(|r| r.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    /// Pixels per lattice unit.
    pub scale: f64,
    /// Level of the boundary polygon, in units of the fan norm.
    pub clip: f64,
    pub palette: Palette,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            width: 600,
            height: 600,
            scale: 40.0,
            clip: 6.0,
            palette: Palette::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Palette {
    pub background: String,
    pub boundary: String,
    pub wall: String,
    pub initial_wall: String,
    pub spine: String,
    pub twig: String,
    pub marked: String,
    pub text: String,
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            background: "#ffffff".into(),
            boundary: "#000000".into(),
            wall: "#9a9a9a".into(),
            initial_wall: "#4a4a4a".into(),
            spine: "#1f4fd1".into(),
            twig: "#d1271f".into(),
            marked: "#111111".into(),
            text: "#333333".into(),
        }
    }
}

impl Default for ModelConfig {
    /// The cubic model: ℙ² with two blowups on each boundary line.
    fn default() -> Self {
        Self {
            fan: FanConfig {
                rays: vec![
                    LatticeVector::new(1, 0),
                    LatticeVector::new(0, 1),
                    LatticeVector::new(-1, -1),
                ],
            },
            blowups: vec![2, 2, 2],
        }
    }
}

impl Config {
    pub fn model(&self) -> Result<ToricModel, CliError> {
        let fan = validate_fan(&self.model.fan.rays)
            .map_err(|e| CliError::Parse(format!("model.fan.rays: {e}")))?;
        build_model(fan, &self.model.blowups)
            .map_err(|e| CliError::Parse(format!("model.blowups: {e}")))
    }
}

/// Parses JSON, reporting the path of the offending field on failure.
pub fn from_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Parse(format!("{what}: at `{path}`: {}", e.inner()))
    })
}

pub fn load_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    from_json(&text, what)
}

pub fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        Some(p) => {
            let config: Config = load_json(p, "config")?;
            config.model()?;
            Ok(config)
        }
        None => Ok(Config::default()),
    }
}

pub fn load_table(path: Option<&Path>) -> Result<ElementaryCountTable, CliError> {
    match path {
        Some(p) => load_json(p, "table"),
        None => Ok(ElementaryCountTable::new()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpineSpec {
    pub p1: LatticeVector,
    pub p2: LatticeVector,
    pub bend_at: [Rational; 2],
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSpec {
    pub spine: SpineSpec,
    pub twig_type: Vec<LatticeVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<IntersectionProfile>,
    /// Whether `class` refers to the extended cylinder.
    #[serde(default = "yes")]
    pub extended: bool,
}

impl CylinderSpec {
    pub fn bend(&self) -> Point {
        Point::new(self.spine.bend_at[0].0, self.spine.bend_at[1].0)
    }

    pub fn assemble(&self, base: &ToricModel) -> Result<PrimitiveCylinder, CliError> {
        Ok(PrimitiveCylinder::assemble(
            base,
            self.spine.p1,
            self.spine.p2,
            self.bend(),
            &self.twig_type,
        )?)
    }

    /// The spec of an assembled cylinder.
    pub fn of(cyl: &PrimitiveCylinder) -> Self {
        let b = cyl.bend();
        Self {
            spine: SpineSpec {
                p1: cyl.p1(),
                p2: cyl.p2(),
                bend_at: [Rational(b.x), Rational(b.y)],
            },
            twig_type: cyl.twig_type().to_vec(),
            class: None,
            extended: true,
        }
    }

    /// The class profile on the cylinder's working model. Profiles given on
    /// the base model are lifted.
    pub fn class_profile(
        &self,
        cyl: &PrimitiveCylinder,
    ) -> Result<Option<IntersectionProfile>, CliError> {
        let Some(profile) = &self.class else {
            return Ok(None);
        };
        if profile.matches(cyl.model()) {
            return Ok(Some(profile.clone()));
        }
        if profile.matches(cyl.base()) {
            return lift_profile(cyl.base(), cyl.model(), profile)
                .map(Some)
                .map_err(|e| CliError::Parse(format!("class: {e}")));
        }
        Err(CliError::Parse(format!(
            "class: profile shape does not match the model ({} rays)",
            cyl.model().num_rays()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_from_integers_and_fractions() {
        assert_eq!(parse_rational("3").unwrap(), Q::from_integer(3));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), Q::new(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("half").is_err());
        let r: Rational = serde_json::from_str("\"5/2\"").unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"5/2\"");
        let n: Rational = serde_json::from_str("4").unwrap();
        assert_eq!(serde_json::to_string(&n).unwrap(), "4");
    }

    #[test]
    fn errors_name_the_offending_path() {
        let err = from_json::<Config>(r#"{"walls":{"steps":"many"}}"#, "config").unwrap_err();
        assert!(err.to_string().contains("at `walls.steps`"), "{err}");
        let err = from_json::<Config>(r#"{"render":{"colour":1}}"#, "config").unwrap_err();
        assert!(err.to_string().contains("render"), "{err}");
    }

    #[test]
    fn partial_configs_fill_in_defaults() {
        let config: Config = from_json(r#"{"walls":{"rule":"support"}}"#, "config").unwrap();
        assert_eq!(config.model, ModelConfig::default());
        assert_eq!(config.walls.rule, WallRule::Support);
        assert_eq!(config.walls.steps, 4);
        assert!(config.model().is_ok());
    }

    #[test]
    fn invalid_models_are_parse_errors() {
        let config: Config = from_json(
            r#"{"model":{"fan":{"rays":[[1,0],[-1,1],[-1,-1]]},"blowups":[0,0,0]}}"#,
            "config",
        )
        .unwrap();
        assert_eq!(config.model().unwrap_err().exit_code(), 2);
    }
}
