use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{decode_image, Image, RegionRect};

/// The shared area of two adjacent inputs, one rectangle in each image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapPair {
    pub a_rect: RegionRect,
    pub b_rect: RegionRect,
}

/// Exposure-ordered inputs with the overlap geometry between neighbours.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StitchSpec {
    pub inputs: Vec<PathBuf>,
    pub overlaps: Vec<OverlapPair>,
    #[serde(default)]
    pub feather: usize,
}

impl StitchSpec {
    /// Parses a spec; relative input paths are resolved against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut spec: StitchSpec =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed stitch spec: {e}")))?;
        for p in &mut spec.inputs {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json(&text, base)
    }

    /// Checks the geometry that can be checked without reading the images.
    pub fn validate(&self) -> Result<()> {
        validate_overlaps(self.inputs.len(), &self.overlaps)
    }

    pub fn load_images(&self) -> Result<Vec<Image>> {
        self.inputs.iter().map(decode_image).collect()
    }
}

pub(crate) fn validate_overlaps(inputs: usize, overlaps: &[OverlapPair]) -> Result<()> {
    if inputs < 2 {
        return Err(Error::Config(format!("need at least 2 inputs, got {inputs}")));
    }
    if overlaps.len() != inputs - 1 {
        return Err(Error::Config(format!(
            "{inputs} inputs need {} overlaps, got {}",
            inputs - 1,
            overlaps.len()
        )));
    }
    for (i, o) in overlaps.iter().enumerate() {
        if o.a_rect.width != o.b_rect.width || o.a_rect.height != o.b_rect.height {
            return Err(Error::Config(format!(
                "overlaps[{i}]: a_rect is {}x{} but b_rect is {}x{}",
                o.a_rect.width, o.a_rect.height, o.b_rect.width, o.b_rect.height
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves_paths() {
        let text = r#"{ "inputs": ["a.png", "/abs/b.png"],
                        "overlaps": [{ "a_rect": [40, 0, 20, 30], "b_rect": [0, 0, 20, 30] }],
                        "feather": 8 }"#;
        let spec = StitchSpec::from_json(text, Path::new("/data")).unwrap();
        assert_eq!(spec.inputs, vec![PathBuf::from("/data/a.png"), PathBuf::from("/abs/b.png")]);
        assert_eq!(spec.overlaps[0].a_rect, RegionRect::new(40, 0, 20, 30));
        assert_eq!(spec.feather, 8);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = StitchSpec::from_json("{\n  \"inputs\": [\n  oops", Path::new(".")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn missing_overlaps_is_config_error() {
        let err = StitchSpec::from_json(r#"{ "inputs": ["a.png", "b.png"], "feather": 0 }"#, Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = StitchSpec::from_json(r#"{ "inputs": ["a.png", "b.png"], "overlaps": [] }"#, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("need 1 overlaps"));
    }

    #[test]
    fn mismatched_rects_rejected() {
        let text = r#"{ "inputs": ["a", "b"], "overlaps": [{ "a_rect": [0,0,5,5], "b_rect": [0,0,5,6] }] }"#;
        assert!(StitchSpec::from_json(text, Path::new(".")).unwrap_err().to_string().contains("overlaps[0]"));
    }
}
