use serde::{Deserialize, Serialize};

use super::params::{ParamSet, ParamSetKind, ParamValue, TraceEntry};
use super::sps::SpsParams;
use super::{skip_scaling_list, unescape_rbsp, DecodeStatus, H264Error, PartialReason, TracingReader, NAL_PPS};

/// Largest map-unit count a level-6.2 picture can have.
const MAX_MAP_UNITS: i64 = 139_264;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpsParams {
    pub nal_ref_idc: u8,
    pub params: ParamSet,
    pub status: DecodeStatus,
    pub residue: Vec<u8>,
    pub trace: Vec<TraceEntry>,
}

impl PpsParams {
    pub fn id(&self) -> Option<i64> {
        self.params.int("pic_parameter_set_id")
    }

    pub fn sps_id(&self) -> Option<i64> {
        self.params.int("seq_parameter_set_id")
    }
}

/// Decodes a PPS NAL unit, header byte included. The referenced SPS supplies
/// chroma format and luma bit depth; without it 4:2:0 and 8-bit are assumed.
pub fn parse_pps(blob: &[u8], sps: Option<&SpsParams>) -> Result<PpsParams, H264Error> {
    let rbsp = unescape_rbsp(blob);
    let mut r = TracingReader::new(&rbsp);
    let nal_ref_idc = r.nal_header(NAL_PPS)?;
    let mut p = ParamSet::new(ParamSetKind::Pps);
    let chroma_format_idc = sps.map_or(1, SpsParams::chroma_format_idc);
    let qp_bd_offset = 6 * sps.map_or(0, SpsParams::bit_depth_luma_minus8);

    p.set_int("pic_parameter_set_id", r.ue_max("pic_parameter_set_id", 255)?);
    p.set_int("seq_parameter_set_id", r.ue_max("seq_parameter_set_id", 31)?);
    p.set_int("entropy_coding_mode_flag", r.u("entropy_coding_mode_flag", 1)?);
    p.set_int(
        "bottom_field_pic_order_in_frame_present_flag",
        r.u("bottom_field_pic_order_in_frame_present_flag", 1)?,
    );
    let groups = r.ue_max("num_slice_groups_minus1", 7)?;
    p.set_int("num_slice_groups_minus1", groups);
    if groups > 0 {
        let map_type = r.ue_max("slice_group_map_type", 6)?;
        p.set_int("slice_group_map_type", map_type);
        match map_type {
            0 => {
                let mut runs = Vec::new();
                for i in 0..=groups {
                    runs.push(r.ue(&format!("run_length_minus1[{i}]"))?);
                }
                p.set("run_length_minus1", ParamValue::List(runs));
            }
            2 => {
                let mut rect = Vec::new();
                for i in 0..groups {
                    rect.push(r.ue(&format!("top_left[{i}]"))?);
                    rect.push(r.ue(&format!("bottom_right[{i}]"))?);
                }
                p.set("top_left_bottom_right", ParamValue::List(rect));
            }
            3..=5 => {
                p.set_int(
                    "slice_group_change_direction_flag",
                    r.u("slice_group_change_direction_flag", 1)?,
                );
                p.set_int("slice_group_change_rate_minus1", r.ue("slice_group_change_rate_minus1")?);
            }
            6 => {
                let units = r.ue_max("pic_size_in_map_units_minus1", MAX_MAP_UNITS - 1)?;
                let width = u64::BITS - (groups as u64).leading_zeros();
                let mut ids = Vec::with_capacity(units as usize + 1);
                for i in 0..=units {
                    ids.push(r.u(&format!("slice_group_id[{i}]"), width)?);
                }
                p.set("slice_group_id", ParamValue::List(ids));
            }
            _ => {}
        }
    }
    p.set_int(
        "num_ref_idx_l0_default_active_minus1",
        r.ue_max("num_ref_idx_l0_default_active_minus1", 31)?,
    );
    p.set_int(
        "num_ref_idx_l1_default_active_minus1",
        r.ue_max("num_ref_idx_l1_default_active_minus1", 31)?,
    );
    p.set_int("weighted_pred_flag", r.u("weighted_pred_flag", 1)?);
    p.set_int("weighted_bipred_idc", r.u("weighted_bipred_idc", 2)?);
    p.set_int("pic_init_qp_minus26", r.se_range("pic_init_qp_minus26", -26 - qp_bd_offset, 25)?);
    p.set_int("pic_init_qs_minus26", r.se_range("pic_init_qs_minus26", -26, 25)?);
    p.set_int("chroma_qp_index_offset", r.se_range("chroma_qp_index_offset", -12, 12)?);
    p.set_int(
        "deblocking_filter_control_present_flag",
        r.u("deblocking_filter_control_present_flag", 1)?,
    );
    p.set_int("constrained_intra_pred_flag", r.u("constrained_intra_pred_flag", 1)?);
    p.set_int("redundant_pic_cnt_present_flag", r.u("redundant_pic_cnt_present_flag", 1)?);

    if r.more_rbsp_data() {
        let t8x8 = r.u("transform_8x8_mode_flag", 1)?;
        p.set_int("transform_8x8_mode_flag", t8x8);
        let matrix = r.u("pic_scaling_matrix_present_flag", 1)?;
        p.set_int("pic_scaling_matrix_present_flag", matrix);
        if matrix == 1 {
            let count = 6 + if chroma_format_idc != 3 { 2 } else { 6 } * t8x8 as usize;
            let mut flags = Vec::with_capacity(count);
            for i in 0..count {
                let f = r.u(&format!("pic_scaling_list_present_flag[{i}]"), 1)?;
                if f == 1 {
                    skip_scaling_list(&mut r, if i < 6 { 16 } else { 64 })?;
                }
                flags.push(f);
            }
            p.set("pic_scaling_list_present_flag", ParamValue::List(flags));
        }
        p.set_int(
            "second_chroma_qp_index_offset",
            r.se_range("second_chroma_qp_index_offset", -12, 12)?,
        );
    }

    let (status, residue) = if r.trailing_bits()? {
        (DecodeStatus::Complete, Vec::new())
    } else {
        (DecodeStatus::Partial(PartialReason::UnknownTail), r.residue())
    };
    Ok(PpsParams { nal_ref_idc, params: p, status, residue, trace: r.into_trace() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::h264::BitWriter;

    fn pps(entropy: bool, qp_ue: u64, tail: bool) -> Vec<u8> {
        let mut w = BitWriter::new();
        w.write_bits(0x68, 8);
        w.write_ue(0);
        w.write_ue(0);
        w.write_bit(entropy);
        w.write_bit(false);
        w.write_ue(0); // slice groups
        w.write_ue(0);
        w.write_ue(0);
        w.write_bit(false);
        w.write_bits(0, 2);
        w.write_ue(qp_ue);
        w.write_se(0);
        w.write_se(-2);
        w.write_bit(true);
        w.write_bit(false);
        w.write_bit(false);
        if tail {
            w.write_bit(true); // transform_8x8
            w.write_bit(false);
            w.write_se(1);
        }
        w.write_trailing_bits();
        w.into_bytes()
    }

    #[test]
    fn cabac_flag() {
        let p = parse_pps(&pps(true, 0, false), None).unwrap();
        assert_eq!(p.params.int("entropy_coding_mode_flag"), Some(1));
        let p = parse_pps(&pps(false, 0, false), None).unwrap();
        assert_eq!(p.params.int("entropy_coding_mode_flag"), Some(0));
    }

    #[test]
    fn base_qp_from_zero_code() {
        let p = parse_pps(&pps(true, 0, false), None).unwrap();
        assert_eq!(p.params.int("pic_init_qp_minus26"), Some(0));
        assert_eq!(p.params.int("pic_init_qp_minus26").unwrap() + 26, 26);
        // ue code 6 -> se -3
        let p = parse_pps(&pps(true, 6, false), None).unwrap();
        assert_eq!(p.params.int("pic_init_qp_minus26"), Some(-3));
    }

    #[test]
    fn optional_tail() {
        let p = parse_pps(&pps(true, 0, false), None).unwrap();
        assert!(p.params.get("transform_8x8_mode_flag").unwrap().is_absent());
        assert!(p.status.is_complete());
        let p = parse_pps(&pps(true, 0, true), None).unwrap();
        assert_eq!(p.params.int("transform_8x8_mode_flag"), Some(1));
        assert_eq!(p.params.int("second_chroma_qp_index_offset"), Some(1));
        assert_eq!(p.params.len(), 25);
        assert!(p.status.is_complete());
    }

    #[test]
    fn qp_out_of_range() {
        // se 27 is ue code 53
        let err = parse_pps(&pps(true, 53, false), None).unwrap_err();
        assert!(matches!(err, H264Error::ValueOutOfRange { .. }));
    }
}
