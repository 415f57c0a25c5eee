//! File bytes to pruned file-metadata tree.

use std::path::Path;

use crate::bmff::{extract_parameter_set_blobs, parse_boxes, parse_file, BmffError, BoxTree};
use crate::h264::EncodingSetting;
use crate::tree::{build_codec_subtree, build_container_subtree, join, prune, ExclusionList, MetaTree};

#[derive(Debug, Clone)]
pub struct Analysis {
    pub boxes: BoxTree,
    /// First SPS of the first avcC record with its PPSs.
    pub setting: Option<EncodingSetting>,
    /// Why the codec subtree is missing, when it is.
    pub codec_error: Option<String>,
    /// Joined and pruned tree, values included.
    pub tree: MetaTree,
}

fn decode_setting(boxes: &BoxTree) -> Result<EncodingSetting, String> {
    let configs = extract_parameter_set_blobs(boxes).map_err(|e| e.to_string())?;
    let cfg = &configs[0];
    let sps = cfg.sps.first().ok_or("avcC record holds no SPS")?;
    EncodingSetting::from_blobs(sps, &cfg.pps).map_err(|e| e.to_string())
}

/// Builds the tree from a parsed box tree. Files without a decodable avcC
/// record get a container-only tree.
pub fn analyze_boxes(boxes: BoxTree, exclusion: &ExclusionList) -> Analysis {
    let (setting, codec_error) = match decode_setting(&boxes) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e)),
    };
    let container = build_container_subtree(&boxes);
    let codec = setting.as_ref().map(build_codec_subtree);
    let tree = prune(&join(&container, codec.as_ref()), exclusion);
    Analysis { boxes, setting, codec_error, tree }
}

pub fn analyze_bytes(bytes: &[u8], exclusion: &ExclusionList) -> Result<Analysis, BmffError> {
    Ok(analyze_boxes(parse_boxes(bytes)?, exclusion))
}

pub fn analyze_file(path: impl AsRef<Path>, exclusion: &ExclusionList) -> Result<Analysis, BmffError> {
    Ok(analyze_boxes(parse_file(path)?, exclusion))
}
