//! Plain-text scenario configuration: `[section]` headers with `key = value`
//! lines, `#` comments, and explicit unit suffixes in key names. Unknown or
//! unused keys are errors, so typos never silently change a run.

use anyhow::{anyhow, bail, Context, Result};
use donorspin_core::{HalfInt, SpinSystem};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Default)]
pub struct Config {
    /// section -> key -> (value, line number)
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
    consumed: RefCell<Vec<(String, String)>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.split_once('#') {
                Some((head, _)) => head.trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    bail!("line {line_no}: malformed section header `{raw}`");
                }
                let name = line[1..line.len() - 1].trim().to_string();
                if name.is_empty() {
                    bail!("line {line_no}: empty section name");
                }
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {line_no}: expected `key = value`, got `{raw}`");
            };
            let section = current
                .clone()
                .ok_or_else(|| anyhow!("line {line_no}: key before any [section]"))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let entry = sections.get_mut(&section).unwrap();
            if entry.insert(key.clone(), (value, line_no)).is_some() {
                bail!("line {line_no}: duplicate key `{key}` in [{section}]");
            }
        }
        Ok(Self {
            sections,
            consumed: RefCell::new(Vec::new()),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        let v = self.sections.get(section)?.get(key)?;
        self.consumed
            .borrow_mut()
            .push((section.to_string(), key.to_string()));
        Some(v.0.as_str())
    }

    pub fn get_str(&self, section: &str, key: &str) -> Option<String> {
        self.raw(section, key).map(str::to_string)
    }

    pub fn require_str(&self, section: &str, key: &str) -> Result<String> {
        self.get_str(section, key)
            .ok_or_else(|| anyhow!("[{section}] is missing required key `{key}`"))
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(s) => {
                Ok(Some(s.parse::<f64>().map_err(|_| {
                    anyhow!("[{section}] {key}: `{s}` is not a number")
                })?))
            }
        }
    }

    pub fn require_f64(&self, section: &str, key: &str) -> Result<f64> {
        self.get_f64(section, key)?
            .ok_or_else(|| anyhow!("[{section}] is missing required key `{key}`"))
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(s) => Ok(Some(s.parse::<usize>().map_err(|_| {
                anyhow!("[{section}] {key}: `{s}` is not a positive integer")
            })?)),
        }
    }

    pub fn require_usize(&self, section: &str, key: &str) -> Result<usize> {
        self.get_usize(section, key)?
            .ok_or_else(|| anyhow!("[{section}] is missing required key `{key}`"))
    }

    /// After a command consumed what it needs, any untouched key in the used
    /// sections is a configuration error.
    pub fn finish(&self, used_sections: &[&str]) -> Result<()> {
        let consumed = self.consumed.borrow();
        for &section in used_sections {
            let Some(keys) = self.sections.get(section) else {
                continue;
            };
            for (key, (_, line_no)) in keys {
                let hit = consumed.iter().any(|(s, k)| s == section && k == key);
                if !hit {
                    bail!("line {line_no}: unknown key `{key}` in [{section}]");
                }
            }
        }
        // sections that exist but were never requested are errors too
        for name in self.sections.keys() {
            if !used_sections.contains(&name.as_str()) {
                bail!("unexpected section [{name}] for this command");
            }
        }
        Ok(())
    }

    /// Builds the spin system from [system]: either `preset = si-bi|si-p`
    /// or the explicit four parameters; `g_factor` may override a preset.
    pub fn system(&self) -> Result<SpinSystem> {
        let section = "system";
        if !self.has_section(section) {
            bail!("config must contain a [system] section");
        }
        let preset = self.get_str(section, "preset");
        let g_override = self.get_f64(section, "g_factor")?;
        let sys = match preset.as_deref() {
            Some("si-bi") => SpinSystem::si_bi(),
            Some("si-p") => SpinSystem::si_p(),
            Some(other) => bail!("[system] preset `{other}` (expected si-bi or si-p)"),
            None => {
                let spin_text = self.require_str(section, "nuclear_spin")?;
                let nuclear_spin = HalfInt::parse(&spin_text)
                    .ok_or_else(|| anyhow!("[system] nuclear_spin `{spin_text}`"))?;
                let a_ghz = self.require_f64(section, "hyperfine_ghz")?;
                let zeeman_ratio = self.require_f64(section, "zeeman_ratio")?;
                let g =
                    g_override.ok_or_else(|| anyhow!("[system] explicit form needs g_factor"))?;
                return SpinSystem::new(nuclear_spin, a_ghz, zeeman_ratio, g)
                    .map_err(|e| anyhow!("[system]: {e}"));
            }
        };
        match g_override {
            Some(g) => sys.with_g_factor(g).map_err(|e| anyhow!("[system]: {e}")),
            None => Ok(sys),
        }
    }

    /// Field from `field_tesla` or `omega0_tilde` (exactly one).
    pub fn field(&self, section: &str, system: &SpinSystem) -> Result<f64> {
        let b = self.get_f64(section, "field_tesla")?;
        let w0t = self.get_f64(section, "omega0_tilde")?;
        match (b, w0t) {
            (Some(b), None) => Ok(b),
            (None, Some(w)) => Ok(system.omega0_tilde_to_field(w)),
            (Some(_), Some(_)) => {
                bail!("[{section}]: give field_tesla or omega0_tilde, not both")
            }
            (None, None) => bail!("[{section}]: needs field_tesla or omega0_tilde"),
        }
    }

    /// Uniform field grid from start/stop/points keys.
    pub fn field_grid(&self, section: &str) -> Result<Vec<f64>> {
        let start = self.require_f64(section, "field_start_tesla")?;
        let stop = self.require_f64(section, "field_stop_tesla")?;
        let points = self.require_usize(section, "field_points")?;
        if points == 0 || (points > 1 && stop <= start) || start < 0.0 {
            bail!("[{section}]: invalid field grid");
        }
        Ok(if points == 1 {
            vec![start]
        } else {
            (0..points)
                .map(|k| start + (stop - start) * k as f64 / (points - 1) as f64)
                .collect()
        })
    }
}

/// Parses "10:1" / "12:0.8165,8:-0.5774" into label-amplitude pairs
/// (amplitudes real; the caller normalizes).
pub fn parse_state(text: &str, dim: usize) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let (label, amp) = part
            .split_once(':')
            .ok_or_else(|| anyhow!("state component `{part}` is not label:amplitude"))?;
        let label: usize = label.trim().parse().context("state label")?;
        if label == 0 || label > dim {
            bail!("state label {label} outside 1..={dim}");
        }
        let amp: f64 = amp.trim().parse().context("state amplitude")?;
        out.push((label, amp));
    }
    if out.is_empty() {
        bail!("empty initial state");
    }
    Ok(out)
}

/// Parses a transition spec "dipole:-3", "plus:-3", "minus:-4" or a label
/// pair "12-11".
pub fn parse_transition(
    text: &str,
    system: &SpinSystem,
) -> Result<donorspin_core::spectra::TransitionClass> {
    use donorspin_core::spectra::{TransitionClass, TransitionKind};
    if let Some((kind, m)) = text.split_once(':') {
        let kind = match kind.trim() {
            "dipole" => TransitionKind::DipoleAllowed,
            "plus" => TransitionKind::PlusForbidden,
            "minus" => TransitionKind::MinusForbidden,
            other => bail!("unknown transition kind `{other}`"),
        };
        let m = HalfInt::parse(m.trim()).ok_or_else(|| anyhow!("bad m `{m}`"))?;
        let class = TransitionClass::new(kind, m);
        if !class.exists(system) {
            bail!("transition {class} does not exist for this system");
        }
        return Ok(class);
    }
    if let Some((a, b)) = text.split_once('-') {
        let a: usize = a.trim().parse().context("transition label")?;
        let b: usize = b.trim().parse().context("transition label")?;
        return donorspin_core::gates::class_between(system, a, b)
            .map_err(|e| anyhow!("transition `{text}`: {e}"));
    }
    bail!("transition `{text}` is neither kind:m nor label-label")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_values() {
        let cfg = Config::parse(
            "# comment\n[system]\npreset = si-bi\n\n[levels]\nfield_points = 5\nfield_start_tesla = 0\nfield_stop_tesla = 1 # inline\noutput_csv = x.csv\n",
        )
        .unwrap();
        let sys = cfg.system().unwrap();
        assert_eq!(sys.dim(), 20);
        let grid = cfg.field_grid("levels").unwrap();
        assert_eq!(grid.len(), 5);
        assert_eq!(cfg.get_str("levels", "output_csv").unwrap(), "x.csv");
        cfg.finish(&["system", "levels"]).unwrap();
    }

    #[test]
    fn unknown_keys_are_errors() {
        let cfg = Config::parse("[system]\npreset = si-bi\nbogus = 1\n").unwrap();
        cfg.system().unwrap();
        let err = cfg.finish(&["system"]).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn unexpected_sections_are_errors() {
        let cfg = Config::parse("[system]\npreset = si-bi\n[spectrum]\nmw_frequency_ghz = 9.7\n")
            .unwrap();
        cfg.system().unwrap();
        assert!(cfg.finish(&["system", "levels"]).is_err());
    }

    #[test]
    fn duplicate_and_malformed_lines_rejected() {
        assert!(Config::parse("[s]\na = 1\na = 2\n").is_err());
        assert!(Config::parse("key = 1\n").is_err());
        assert!(Config::parse("[s\n").is_err());
    }

    #[test]
    fn explicit_system_and_overrides() {
        let cfg = Config::parse(
            "[system]\nnuclear_spin = 1/2\nhyperfine_ghz = 0.1\nzeeman_ratio = 0\ng_factor = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.system().unwrap().dim(), 4);
        let cfg2 = Config::parse("[system]\npreset = si-bi\ng_factor = 2.0003\n").unwrap();
        assert_eq!(cfg2.system().unwrap().g_factor(), 2.0003);
    }

    #[test]
    fn state_and_transition_parsers() {
        let sys = SpinSystem::si_bi();
        let state = parse_state("12: 0.8, 8: -0.6", 20).unwrap();
        assert_eq!(state, vec![(12, 0.8), (8, -0.6)]);
        assert!(parse_state("21:1", 20).is_err());
        let t = parse_transition("dipole:-3", &sys).unwrap();
        assert_eq!(t.m, HalfInt::from_int(-3));
        let t2 = parse_transition("12-11", &sys).unwrap();
        assert_eq!(
            t2.kind,
            donorspin_core::spectra::TransitionKind::PlusForbidden
        );
        assert!(parse_transition("dipole:9", &sys).is_err());
    }
}
