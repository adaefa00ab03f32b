//! Flat `key = value` experiment configuration.
//!
//! Keys are namespaced per subcommand (`clt.sizes`, `bai.v`, ...). Unknown
//! keys are rejected loudly: a config that silently ignores entries cannot
//! reproduce an experiment.

use std::collections::BTreeMap;

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                ));
            };
            let key = k.trim().to_string();
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(format!("duplicate key {key:?}"));
            }
        }
        Ok(Self { entries })
    }

    /// Checks that every key lives in `namespace` and belongs to `allowed`.
    pub fn validate(&self, namespace: &str, allowed: &[&str]) -> Result<(), String> {
        for key in self.entries.keys() {
            let Some(rest) = key.strip_prefix(namespace).and_then(|r| r.strip_prefix('.')) else {
                return Err(format!(
                    "key {key:?} does not belong to the `{namespace}` namespace"
                ));
            };
            if !allowed.contains(&rest) {
                return Err(format!(
                    "unknown key {key:?}; `{namespace}` accepts: {}",
                    allowed
                        .iter()
                        .map(|a| format!("{namespace}.{a}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
        }
        Ok(())
    }

    pub fn get(&self, namespace: &str, key: &str) -> Option<&str> {
        self.entries
            .get(&format!("{namespace}.{key}"))
            .map(|s| s.as_str())
    }

    pub fn get_f64(&self, namespace: &str, key: &str) -> Result<Option<f64>, String> {
        self.get(namespace, key)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| format!("{namespace}.{key}: bad number {s:?}: {e}"))
            })
            .transpose()
    }

    pub fn get_usize(&self, namespace: &str, key: &str) -> Result<Option<usize>, String> {
        self.get(namespace, key)
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|e| format!("{namespace}.{key}: bad integer {s:?}: {e}"))
            })
            .transpose()
    }

    pub fn get_bool(&self, namespace: &str, key: &str) -> Result<Option<bool>, String> {
        self.get(namespace, key)
            .map(|s| {
                s.parse::<bool>()
                    .map_err(|e| format!("{namespace}.{key}: bad boolean {s:?}: {e}"))
            })
            .transpose()
    }

    pub fn get_u32_list(&self, namespace: &str, key: &str) -> Result<Option<Vec<u32>>, String> {
        self.get(namespace, key)
            .map(|s| {
                s.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u32>()
                            .map_err(|e| format!("{namespace}.{key}: bad integer {t:?}: {e}"))
                    })
                    .collect()
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates_namespaced_keys() {
        let c = Config::parse("clt.sizes = 4,8,16\nclt.resolution = 2048\n").unwrap();
        c.validate("clt", &["sizes", "resolution", "base"]).unwrap();
        assert_eq!(c.get_u32_list("clt", "sizes").unwrap().unwrap(), vec![4, 8, 16]);
        assert_eq!(c.get_usize("clt", "resolution").unwrap(), Some(2048));
    }

    #[test]
    fn rejects_unknown_and_foreign_keys() {
        let c = Config::parse("clt.sizes = 4\nbai.v = 0.1\n").unwrap();
        assert!(c.validate("clt", &["sizes"]).is_err());
        let c = Config::parse("clt.sizzes = 4\n").unwrap();
        assert!(c.validate("clt", &["sizes"]).is_err());
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(Config::parse("a.b = 1\na.b = 2\n").is_err());
        assert!(Config::parse("just words\n").is_err());
    }
}
