//! Named parameter records in syntax order.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamValue {
    /// The syntax element was not signalled in this header.
    Absent,
    Int(i64),
    List(Vec<i64>),
}

impl ParamValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, ParamValue::Absent)
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Absent => f.write_str("absent"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::List(vs) => {
                f.write_str("[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamSetKind {
    Sps,
    Pps,
    Vui,
}

impl ParamSetKind {
    pub fn label(self) -> &'static str {
        match self {
            ParamSetKind::Sps => "SPS",
            ParamSetKind::Pps => "PPS",
            ParamSetKind::Vui => "VUI",
        }
    }

    /// Static (name, categorical) table in syntax order.
    pub fn spec(self) -> &'static [(&'static str, bool)] {
        match self {
            ParamSetKind::Sps => SPS_PARAMS,
            ParamSetKind::Pps => PPS_PARAMS,
            ParamSetKind::Vui => VUI_PARAMS,
        }
    }
}

pub const SPS_PARAMS: &[(&str, bool)] = &[
    ("profile_idc", true),
    ("constraint_set0_flag", true),
    ("constraint_set1_flag", true),
    ("constraint_set2_flag", true),
    ("constraint_set3_flag", true),
    ("constraint_set4_flag", true),
    ("constraint_set5_flag", true),
    ("reserved_zero_2bits", true),
    ("level_idc", true),
    ("seq_parameter_set_id", true),
    ("chroma_format_idc", true),
    ("separate_colour_plane_flag", true),
    ("bit_depth_luma_minus8", false),
    ("bit_depth_chroma_minus8", false),
    ("qpprime_y_zero_transform_bypass_flag", true),
    ("seq_scaling_matrix_present_flag", true),
    ("seq_scaling_list_present_flag", true),
    ("log2_max_frame_num_minus4", false),
    ("pic_order_cnt_type", true),
    ("log2_max_pic_order_cnt_lsb_minus4", false),
    ("delta_pic_order_always_zero_flag", true),
    ("offset_for_non_ref_pic", false),
    ("offset_for_top_to_bottom_field", false),
    ("num_ref_frames_in_pic_order_cnt_cycle", false),
    ("offset_for_ref_frame", false),
    ("max_num_ref_frames", false),
    ("gaps_in_frame_num_value_allowed_flag", true),
    ("pic_width_in_mbs_minus1", false),
    ("pic_height_in_map_units_minus1", false),
    ("frame_mbs_only_flag", true),
    ("mb_adaptive_frame_field_flag", true),
    ("direct_8x8_inference_flag", true),
    ("frame_cropping_flag", true),
    ("frame_crop_left_offset", false),
    ("frame_crop_right_offset", false),
    ("frame_crop_top_offset", false),
    ("frame_crop_bottom_offset", false),
    ("vui_parameters_present_flag", true),
];

pub const PPS_PARAMS: &[(&str, bool)] = &[
    ("pic_parameter_set_id", true),
    ("seq_parameter_set_id", true),
    ("entropy_coding_mode_flag", true),
    ("bottom_field_pic_order_in_frame_present_flag", true),
    ("num_slice_groups_minus1", false),
    ("slice_group_map_type", true),
    ("run_length_minus1", false),
    ("top_left_bottom_right", false),
    ("slice_group_change_direction_flag", true),
    ("slice_group_change_rate_minus1", false),
    ("slice_group_id", false),
    ("num_ref_idx_l0_default_active_minus1", false),
    ("num_ref_idx_l1_default_active_minus1", false),
    ("weighted_pred_flag", true),
    ("weighted_bipred_idc", true),
    ("pic_init_qp_minus26", false),
    ("pic_init_qs_minus26", false),
    ("chroma_qp_index_offset", false),
    ("deblocking_filter_control_present_flag", true),
    ("constrained_intra_pred_flag", true),
    ("redundant_pic_cnt_present_flag", true),
    ("transform_8x8_mode_flag", true),
    ("pic_scaling_matrix_present_flag", true),
    ("pic_scaling_list_present_flag", true),
    ("second_chroma_qp_index_offset", false),
];

pub const VUI_PARAMS: &[(&str, bool)] = &[
    ("aspect_ratio_info_present_flag", true),
    ("aspect_ratio_idc", true),
    ("sar_width", false),
    ("sar_height", false),
    ("overscan_info_present_flag", true),
    ("overscan_appropriate_flag", true),
    ("video_signal_type_present_flag", true),
    ("video_format", true),
    ("video_full_range_flag", true),
    ("colour_description_present_flag", true),
    ("colour_primaries", true),
    ("transfer_characteristics", true),
    ("matrix_coefficients", true),
    ("chroma_loc_info_present_flag", true),
    ("chroma_sample_loc_type_top_field", true),
    ("chroma_sample_loc_type_bottom_field", true),
    ("timing_info_present_flag", true),
    ("num_units_in_tick", false),
    ("time_scale", false),
    ("fixed_frame_rate_flag", true),
    ("nal_hrd_parameters_present_flag", true),
    ("vcl_hrd_parameters_present_flag", true),
    ("low_delay_hrd_flag", true),
    ("pic_struct_present_flag", true),
    ("bitstream_restriction_flag", true),
    ("motion_vectors_over_pic_boundaries_flag", true),
    ("max_bytes_per_pic_denom", false),
    ("max_bits_per_mb_denom", false),
    ("log2_max_mv_length_horizontal", false),
    ("log2_max_mv_length_vertical", false),
    ("max_num_reorder_frames", false),
    ("max_dec_frame_buffering", false),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: ParamValue,
    pub categorical: bool,
}

/// One header's parameters, always holding every entry of its kind's table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamSet {
    kind: ParamSetKind,
    params: Vec<Param>,
}

impl ParamSet {
    pub fn new(kind: ParamSetKind) -> Self {
        let params = kind
            .spec()
            .iter()
            .map(|&(name, categorical)| Param { name: name.to_owned(), value: ParamValue::Absent, categorical })
            .collect();
        Self { kind, params }
    }

    pub fn kind(&self) -> ParamSetKind {
        self.kind
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Number of parameters carrying a value.
    pub fn present_count(&self) -> usize {
        self.params.iter().filter(|p| !p.value.is_absent()).count()
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.params.iter().find(|p| p.name == name).map(|p| &p.value)
    }

    pub fn int(&self, name: &str) -> Option<i64> {
        self.get(name).and_then(ParamValue::as_int)
    }

    /// Sets a parameter by name. Panics on a name outside the table, which is
    /// always a bug in the caller.
    pub fn set(&mut self, name: &str, value: ParamValue) {
        let kind = self.kind;
        let slot = self
            .params
            .iter_mut()
            .find(|p| p.name == name)
            .unwrap_or_else(|| panic!("{name} is not a {} parameter", kind.label()));
        slot.value = value;
    }

    pub fn set_int(&mut self, name: &str, value: i64) {
        self.set(name, ParamValue::Int(value));
    }
}

/// One decoded syntax element with its bit offset from the start of the NAL
/// unit (header byte included, emulation-prevention bytes removed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub bit: usize,
    pub name: String,
    pub value: i64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_sizes() {
        assert_eq!(SPS_PARAMS.len(), 38);
        assert_eq!(PPS_PARAMS.len(), 25);
        assert_eq!(VUI_PARAMS.len(), 32);
    }

    #[test]
    fn names_unique_across_a_table() {
        for kind in [ParamSetKind::Sps, ParamSetKind::Pps, ParamSetKind::Vui] {
            let mut names: Vec<_> = kind.spec().iter().map(|p| p.0).collect();
            names.sort_unstable();
            names.dedup();
            assert_eq!(names.len(), kind.spec().len());
        }
    }

    #[test]
    fn rendering() {
        assert_eq!(ParamValue::Absent.to_string(), "absent");
        assert_eq!(ParamValue::Int(-3).to_string(), "-3");
        assert_eq!(ParamValue::List(vec![1, 0, 2]).to_string(), "[1,0,2]");
        assert_eq!(ParamValue::List(vec![]).to_string(), "[]");
    }

    #[test]
    fn set_and_get() {
        let mut s = ParamSet::new(ParamSetKind::Pps);
        assert_eq!(s.present_count(), 0);
        s.set_int("entropy_coding_mode_flag", 1);
        assert_eq!(s.int("entropy_coding_mode_flag"), Some(1));
        assert_eq!(s.present_count(), 1);
    }

    #[test]
    #[should_panic]
    fn unknown_name_panics() {
        ParamSet::new(ParamSetKind::Vui).set_int("level_idc", 1);
    }
}
