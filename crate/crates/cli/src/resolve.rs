use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use odp_core::dsl::parse_model_named;
use odp_core::metamodel::Model;

/// Finds the model a system or trace refers to: the explicit `--model`
/// file if given, otherwise `<name>.odpm` in the input's directory or the
/// search path. More than one candidate is an error.
#[derive(Clone, Debug)]
pub struct ModelResolver {
    search: Vec<PathBuf>,
    explicit: Option<PathBuf>,
}

impl ModelResolver {
    pub fn new(search: Vec<PathBuf>) -> Self {
        ModelResolver { search, explicit: None }
    }

    pub fn with_explicit(&self, explicit: Option<PathBuf>) -> Self {
        ModelResolver {
            search: self.search.clone(),
            explicit,
        }
    }

    fn load(path: &Path) -> Result<Model, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        parse_model_named(&text, &path.display().to_string()).map_err(|r| r.to_string())
    }

    pub fn resolve(&self, name: &str, input: &Path) -> Result<Model, String> {
        if let Some(path) = &self.explicit {
            return Self::load(path);
        }
        let file = format!("{name}.odpm");
        let dirs = input
            .parent()
            .map(|p| if p.as_os_str().is_empty() { Path::new(".") } else { p })
            .into_iter()
            .chain(self.search.iter().map(PathBuf::as_path));
        let mut found: BTreeMap<PathBuf, PathBuf> = BTreeMap::new();
        for candidate in dirs.map(|d| d.join(&file)).filter(|p| p.is_file()) {
            if let Ok(canonical) = candidate.canonicalize() {
                found.entry(canonical).or_insert(candidate);
            }
        }
        let path = match found.len() {
            0 => {
                return Err(format!(
                    "no model file {file} found next to the input or on the model path"
                ))
            }
            1 => found.into_values().next().unwrap(),
            _ => {
                let list: Vec<String> = found.values().map(|p| p.display().to_string()).collect();
                return Err(format!("model {name} is ambiguous: {}", list.join(", ")));
            }
        };
        let model = Self::load(&path)?;
        if model.name != name {
            return Err(format!("{} declares model {}, not {name}", path.display(), model.name));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, file: &str, text: &str) -> PathBuf {
        let path = dir.join(file);
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn sibling_then_search_path() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let input = write(a.path(), "s.odps", "");
        write(b.path(), "m.odpm", "model m { }");
        let r = ModelResolver::new(vec![b.path().to_path_buf()]);
        assert_eq!(r.resolve("m", &input).unwrap().name, "m");
        assert!(ModelResolver::new(Vec::new()).resolve("m", &input).is_err());
    }

    #[test]
    fn same_file_twice_is_not_ambiguous() {
        let a = tempfile::tempdir().unwrap();
        let input = write(a.path(), "s.odps", "");
        write(a.path(), "m.odpm", "model m { }");
        let r = ModelResolver::new(vec![a.path().to_path_buf(), a.path().join(".")]);
        assert!(r.resolve("m", &input).is_ok());
    }

    #[test]
    fn two_files_are_ambiguous_and_names_must_match() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let input = write(a.path(), "s.odps", "");
        write(a.path(), "m.odpm", "model m { }");
        write(b.path(), "m.odpm", "model m { }");
        let err = ModelResolver::new(vec![b.path().to_path_buf()])
            .resolve("m", &input)
            .unwrap_err();
        assert!(err.contains("ambiguous"), "{err}");
        write(b.path(), "n.odpm", "model other { }");
        let err = ModelResolver::new(vec![b.path().to_path_buf()])
            .resolve("n", &input)
            .unwrap_err();
        assert!(err.contains("declares model other"), "{err}");
    }

    #[test]
    fn explicit_model_wins() {
        let a = tempfile::tempdir().unwrap();
        let path = write(a.path(), "x.odpm", "model x { }");
        let r = ModelResolver::new(Vec::new()).with_explicit(Some(path));
        assert_eq!(r.resolve("anything", Path::new("s.odps")).unwrap().name, "x");
    }
}
