//! Flat `key = value` representation of [`AnalysisConfig`].
//!
//! Blank lines and lines starting with `#` are ignored. Keys missing from a
//! file keep their defaults. The window scheme is spread over `window_*`
//! keys; only the ones relevant to `window_kind` are written.

use mdsts_core::walk::{SymbolizationMode, WindowScheme};
use mdsts_core::zipf::Equivalence;
use mdsts_core::AnalysisConfig;

use crate::error::CliError;

const KEYS: &[&str] = &[
    "alphabet_size",
    "differencing",
    "window_kind",
    "window_length",
    "window_step",
    "window_count",
    "window_seed",
    "word_length",
    "equivalence",
    "rare_threshold",
    "sparsity_delta",
    "symbolization_mode",
    "holdout_tail",
];

pub fn to_text(config: &AnalysisConfig) -> String {
    let mut lines = vec![
        format!("alphabet_size = {}", config.alphabet_size),
        format!("differencing = {}", config.differencing),
    ];
    match config.window {
        WindowScheme::Overlapping { length, step } => {
            lines.push("window_kind = overlapping".into());
            lines.push(format!("window_length = {length}"));
            lines.push(format!("window_step = {step}"));
        }
        WindowScheme::NonOverlapping { length } => {
            lines.push("window_kind = non_overlapping".into());
            lines.push(format!("window_length = {length}"));
        }
        WindowScheme::RandomStarts { length, count, seed } => {
            lines.push("window_kind = random_starts".into());
            lines.push(format!("window_length = {length}"));
            lines.push(format!("window_count = {count}"));
            lines.push(format!("window_seed = {seed}"));
        }
    }
    lines.push(format!("word_length = {}", config.word_length));
    lines.push(format!("equivalence = {}", config.equivalence.as_str()));
    // `{:?}` keeps a decimal point and round-trips exactly.
    lines.push(format!("rare_threshold = {:?}", config.rare_threshold));
    lines.push(format!("sparsity_delta = {:?}", config.sparsity_delta));
    lines.push(format!("symbolization_mode = {}", mode_str(config.symbolization_mode)));
    lines.push(format!("holdout_tail = {}", config.holdout_tail));
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

fn mode_str(mode: SymbolizationMode) -> &'static str {
    match mode {
        SymbolizationMode::GlobalRange => "global_range",
        SymbolizationMode::PerWindow => "per_window",
    }
}

/// Accumulates settings on top of a base configuration.
#[derive(Debug, Clone)]
pub struct ConfigBuilder {
    config: AnalysisConfig,
    kind: Option<String>,
    length: Option<usize>,
    step: Option<usize>,
    count: Option<usize>,
    seed: Option<u64>,
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        ConfigBuilder::new(AnalysisConfig::default())
    }
}

impl ConfigBuilder {
    pub fn new(config: AnalysisConfig) -> Self {
        ConfigBuilder { config, kind: None, length: None, step: None, count: None, seed: None }
    }

    /// Applies every `key = value` line of `text`; `origin` names the source in errors.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{origin}:{}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Usage(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Applies a single `key=value` override.
    pub fn apply_override(&mut self, pair: &str) -> Result<(), CliError> {
        let (key, value) =
            pair.split_once('=').ok_or_else(|| CliError::Usage(format!("override `{pair}` is not key=value")))?;
        self.set(key.trim(), value.trim()).map_err(|e| CliError::Usage(format!("--set {pair}: {e}")))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value.parse().map_err(|_| format!("invalid value `{value}` for {key}"))
        }
        let c = &mut self.config;
        match key {
            "alphabet_size" => c.alphabet_size = num(key, value)?,
            "differencing" => c.differencing = num(key, value)?,
            "window_kind" => self.kind = Some(value.to_owned()),
            "window_length" => self.length = Some(num(key, value)?),
            "window_step" => self.step = Some(num(key, value)?),
            "window_count" => self.count = Some(num(key, value)?),
            "window_seed" => self.seed = Some(num(key, value)?),
            "word_length" => c.word_length = num(key, value)?,
            "equivalence" => c.equivalence = value.parse::<Equivalence>().map_err(|e| e.to_string())?,
            "rare_threshold" => c.rare_threshold = num(key, value)?,
            "sparsity_delta" => c.sparsity_delta = num(key, value)?,
            "symbolization_mode" => {
                c.symbolization_mode = match value {
                    "global_range" => SymbolizationMode::GlobalRange,
                    "per_window" => SymbolizationMode::PerWindow,
                    _ => return Err(format!("unknown symbolization_mode `{value}`")),
                }
            }
            "holdout_tail" => c.holdout_tail = num(key, value)?,
            _ => return Err(format!("unknown key `{key}` (expected one of {})", KEYS.join(", "))),
        }
        Ok(())
    }

    pub fn build(self) -> Result<AnalysisConfig, CliError> {
        let mut config = self.config;
        let (base_len, base_step, base_count, base_seed) = match config.window {
            WindowScheme::Overlapping { length, step } => (length, step, 1, 0),
            WindowScheme::NonOverlapping { length } => (length, length, 1, 0),
            WindowScheme::RandomStarts { length, count, seed } => (length, length, count, seed),
        };
        let base_kind = match config.window {
            WindowScheme::Overlapping { .. } => "overlapping",
            WindowScheme::NonOverlapping { .. } => "non_overlapping",
            WindowScheme::RandomStarts { .. } => "random_starts",
        };
        let length = self.length.unwrap_or(base_len);
        config.window = match self.kind.as_deref().unwrap_or(base_kind) {
            "overlapping" => WindowScheme::Overlapping { length, step: self.step.unwrap_or(base_step) },
            "non_overlapping" => WindowScheme::NonOverlapping { length },
            "random_starts" => WindowScheme::RandomStarts {
                length,
                count: self.count.unwrap_or(base_count),
                seed: self.seed.unwrap_or(base_seed),
            },
            other => return Err(CliError::Usage(format!("unknown window_kind `{other}`"))),
        };
        config.validate().map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
        Ok(config)
    }
}

pub fn parse(text: &str) -> Result<AnalysisConfig, CliError> {
    let mut b = ConfigBuilder::default();
    b.apply_text(text, "config")?;
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = AnalysisConfig::default();
        let text = to_text(&c);
        assert!(text.contains("window_kind = overlapping\nwindow_length = 350\nwindow_step = 52\n"));
        assert_eq!(parse(&text).unwrap(), c);
    }

    #[test]
    fn every_scheme_round_trips() {
        for window in [
            WindowScheme::NonOverlapping { length: 20 },
            WindowScheme::RandomStarts { length: 30, count: 7, seed: u64::MAX },
        ] {
            let c = AnalysisConfig {
                window,
                rare_threshold: 0.1 + 0.2,
                symbolization_mode: SymbolizationMode::PerWindow,
                equivalence: Equivalence::Exact,
                ..AnalysisConfig::default()
            };
            assert_eq!(parse(&to_text(&c)).unwrap(), c);
        }
    }

    #[test]
    fn comments_partial_files_and_overrides() {
        let mut b = ConfigBuilder::default();
        b.apply_text("# protocol\n\nwindow_length = 100\n", "f").unwrap();
        b.apply_override("window_step=10").unwrap();
        let c = b.build().unwrap();
        assert_eq!(c.window, WindowScheme::Overlapping { length: 100, step: 10 });
        assert_eq!(c.alphabet_size, 4);
    }

    proptest::proptest! {
        #[test]
        fn arbitrary_configs_round_trip(
            l in 2usize..=255,
            differencing: bool,
            kind in 0u8..3,
            w in 1usize..10_000,
            s in 1usize..1_000,
            k in 1usize..100,
            seed: u64,
            p in 1usize..40,
            exact: bool,
            rare in 0.0f64..=1.0,
            delta in 0.0f64..=1.0,
            per_window: bool,
            tail in 0usize..1_000,
        ) {
            let window = match kind {
                0 => WindowScheme::Overlapping { length: w, step: s },
                1 => WindowScheme::NonOverlapping { length: w },
                _ => WindowScheme::RandomStarts { length: w, count: k, seed },
            };
            let c = AnalysisConfig {
                alphabet_size: l,
                differencing,
                window,
                word_length: p,
                equivalence: if exact { Equivalence::Exact } else { Equivalence::Composition },
                rare_threshold: rare,
                sparsity_delta: delta,
                symbolization_mode: if per_window { SymbolizationMode::PerWindow } else { SymbolizationMode::GlobalRange },
                holdout_tail: tail,
            };
            proptest::prop_assert_eq!(parse(&to_text(&c)).unwrap(), c);
        }
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse("alphabet_size = 4\ncolour = red\n").unwrap_err().to_string();
        assert!(e.contains("config:2") && e.contains("colour"), "{e}");
        assert!(parse("alphabet_size = four").is_err());
        assert!(parse("alphabet_size = 1").unwrap_err().to_string().contains("invalid configuration"));
        assert!(parse("window_kind = spiral").is_err());
        assert!(parse("no equals sign").is_err());
    }
}
