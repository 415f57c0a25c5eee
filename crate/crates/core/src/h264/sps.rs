use serde::{Deserialize, Serialize};

use super::params::{ParamSet, ParamSetKind, ParamValue, TraceEntry};
use super::{skip_scaling_list, unescape_rbsp, DecodeStatus, H264Error, PartialReason, TracingReader, NAL_SPS};

/// Profiles that take the chroma-format / bit-depth / scaling-matrix branch.
pub const HIGH_PROFILES: &[u8] = &[100, 110, 122, 244, 44, 83, 86, 118, 128, 138, 139, 134, 135];

/// Profiles whose SPS syntax is fully covered.
pub const KNOWN_PROFILES: &[u8] =
    &[66, 77, 88, 100, 110, 122, 244, 44, 83, 86, 118, 128, 138, 139, 134, 135];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hrd {
    pub cpb_cnt_minus1: u32,
    pub bit_rate_scale: u8,
    pub cpb_size_scale: u8,
    pub bit_rate_value_minus1: Vec<u32>,
    pub cpb_size_value_minus1: Vec<u32>,
    pub cbr_flag: Vec<bool>,
    pub initial_cpb_removal_delay_length_minus1: u8,
    pub cpb_removal_delay_length_minus1: u8,
    pub dpb_output_delay_length_minus1: u8,
    pub time_offset_length: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpsParams {
    pub nal_ref_idc: u8,
    pub params: ParamSet,
    /// Present exactly when `vui_parameters_present_flag` is 1.
    pub vui: Option<ParamSet>,
    pub nal_hrd: Option<Hrd>,
    pub vcl_hrd: Option<Hrd>,
    pub status: DecodeStatus,
    /// Undecoded bytes from the point decoding stopped, for partial records.
    pub residue: Vec<u8>,
    pub trace: Vec<TraceEntry>,
}

impl SpsParams {
    pub fn id(&self) -> Option<i64> {
        self.params.int("seq_parameter_set_id")
    }

    pub fn profile_idc(&self) -> u8 {
        self.params.int("profile_idc").unwrap_or(0) as u8
    }

    /// Inferred as 4:2:0 when not signalled.
    pub fn chroma_format_idc(&self) -> i64 {
        self.params.int("chroma_format_idc").unwrap_or(1)
    }

    pub fn bit_depth_luma_minus8(&self) -> i64 {
        self.params.int("bit_depth_luma_minus8").unwrap_or(0)
    }

    /// Cropped frame size in luma samples.
    pub fn frame_size(&self) -> Option<(u32, u32)> {
        let p = &self.params;
        let w_mbs = p.int("pic_width_in_mbs_minus1")? + 1;
        let h_units = p.int("pic_height_in_map_units_minus1")? + 1;
        let frame_mbs_only = p.int("frame_mbs_only_flag")?;
        let h_mbs = h_units * (2 - frame_mbs_only);
        let cfi = self.chroma_format_idc();
        let separate = p.int("separate_colour_plane_flag").unwrap_or(0) == 1;
        let (sub_w, sub_h) = match (cfi, separate) {
            (1, false) => (2, 2),
            (2, false) => (2, 1),
            _ => (1, 1),
        };
        let (crop_x, crop_y) = if cfi == 0 || separate {
            (1, 2 - frame_mbs_only)
        } else {
            (sub_w, sub_h * (2 - frame_mbs_only))
        };
        let off = |n: &str| p.int(n).unwrap_or(0);
        let w = w_mbs * 16 - crop_x * (off("frame_crop_left_offset") + off("frame_crop_right_offset"));
        let h = h_mbs * 16 - crop_y * (off("frame_crop_top_offset") + off("frame_crop_bottom_offset"));
        Some((u32::try_from(w).ok()?, u32::try_from(h).ok()?))
    }
}

/// Decodes an SPS NAL unit, header byte included.
pub fn parse_sps(blob: &[u8]) -> Result<SpsParams, H264Error> {
    let rbsp = unescape_rbsp(blob);
    let mut r = TracingReader::new(&rbsp);
    let nal_ref_idc = r.nal_header(NAL_SPS)?;
    let mut p = ParamSet::new(ParamSetKind::Sps);

    let profile = r.u("profile_idc", 8)?;
    p.set_int("profile_idc", profile);
    for i in 0..6 {
        let name = format!("constraint_set{i}_flag");
        let v = r.u(&name, 1)?;
        p.set_int(&name, v);
    }
    p.set_int("reserved_zero_2bits", r.u("reserved_zero_2bits", 2)?);
    p.set_int("level_idc", r.u("level_idc", 8)?);
    p.set_int("seq_parameter_set_id", r.ue_max("seq_parameter_set_id", 31)?);

    let profile = profile as u8;
    if !KNOWN_PROFILES.contains(&profile) {
        let residue = r.residue();
        return Ok(SpsParams {
            nal_ref_idc,
            params: p,
            vui: None,
            nal_hrd: None,
            vcl_hrd: None,
            status: DecodeStatus::Partial(PartialReason::UnsupportedProfile(profile)),
            residue,
            trace: r.into_trace(),
        });
    }

    if HIGH_PROFILES.contains(&profile) {
        let cfi = r.ue_max("chroma_format_idc", 3)?;
        p.set_int("chroma_format_idc", cfi);
        if cfi == 3 {
            p.set_int("separate_colour_plane_flag", r.u("separate_colour_plane_flag", 1)?);
        }
        p.set_int("bit_depth_luma_minus8", r.ue_max("bit_depth_luma_minus8", 6)?);
        p.set_int("bit_depth_chroma_minus8", r.ue_max("bit_depth_chroma_minus8", 6)?);
        p.set_int(
            "qpprime_y_zero_transform_bypass_flag",
            r.u("qpprime_y_zero_transform_bypass_flag", 1)?,
        );
        let matrix = r.u("seq_scaling_matrix_present_flag", 1)?;
        p.set_int("seq_scaling_matrix_present_flag", matrix);
        if matrix == 1 {
            let count = if cfi != 3 { 8 } else { 12 };
            let mut flags = Vec::with_capacity(count);
            for i in 0..count {
                let f = r.u(&format!("seq_scaling_list_present_flag[{i}]"), 1)?;
                if f == 1 {
                    skip_scaling_list(&mut r, if i < 6 { 16 } else { 64 })?;
                }
                flags.push(f);
            }
            p.set("seq_scaling_list_present_flag", ParamValue::List(flags));
        }
    }

    p.set_int("log2_max_frame_num_minus4", r.ue_max("log2_max_frame_num_minus4", 12)?);
    let poc_type = r.ue_max("pic_order_cnt_type", 2)?;
    p.set_int("pic_order_cnt_type", poc_type);
    if poc_type == 0 {
        p.set_int(
            "log2_max_pic_order_cnt_lsb_minus4",
            r.ue_max("log2_max_pic_order_cnt_lsb_minus4", 12)?,
        );
    } else if poc_type == 1 {
        p.set_int(
            "delta_pic_order_always_zero_flag",
            r.u("delta_pic_order_always_zero_flag", 1)?,
        );
        p.set_int("offset_for_non_ref_pic", r.se("offset_for_non_ref_pic")?);
        p.set_int("offset_for_top_to_bottom_field", r.se("offset_for_top_to_bottom_field")?);
        let n = r.ue_max("num_ref_frames_in_pic_order_cnt_cycle", 255)?;
        p.set_int("num_ref_frames_in_pic_order_cnt_cycle", n);
        let mut offsets = Vec::with_capacity(n as usize);
        for i in 0..n {
            offsets.push(r.se(&format!("offset_for_ref_frame[{i}]"))?);
        }
        p.set("offset_for_ref_frame", ParamValue::List(offsets));
    }

    p.set_int("max_num_ref_frames", r.ue("max_num_ref_frames")?);
    p.set_int(
        "gaps_in_frame_num_value_allowed_flag",
        r.u("gaps_in_frame_num_value_allowed_flag", 1)?,
    );
    p.set_int("pic_width_in_mbs_minus1", r.ue("pic_width_in_mbs_minus1")?);
    p.set_int("pic_height_in_map_units_minus1", r.ue("pic_height_in_map_units_minus1")?);
    let frame_mbs_only = r.u("frame_mbs_only_flag", 1)?;
    p.set_int("frame_mbs_only_flag", frame_mbs_only);
    if frame_mbs_only == 0 {
        p.set_int("mb_adaptive_frame_field_flag", r.u("mb_adaptive_frame_field_flag", 1)?);
    }
    p.set_int("direct_8x8_inference_flag", r.u("direct_8x8_inference_flag", 1)?);
    let cropping = r.u("frame_cropping_flag", 1)?;
    p.set_int("frame_cropping_flag", cropping);
    if cropping == 1 {
        for side in ["left", "right", "top", "bottom"] {
            let name = format!("frame_crop_{side}_offset");
            let v = r.ue(&name)?;
            p.set_int(&name, v);
        }
    }
    let vui_present = r.u("vui_parameters_present_flag", 1)?;
    p.set_int("vui_parameters_present_flag", vui_present);

    let (vui, nal_hrd, vcl_hrd) = if vui_present == 1 {
        let (v, nal, vcl) = parse_vui(&mut r)?;
        (Some(v), nal, vcl)
    } else {
        (None, None, None)
    };

    let (status, residue) = if r.trailing_bits()? {
        (DecodeStatus::Complete, Vec::new())
    } else {
        (DecodeStatus::Partial(PartialReason::BadTrailingBits), r.residue())
    };

    Ok(SpsParams {
        nal_ref_idc,
        params: p,
        vui,
        nal_hrd,
        vcl_hrd,
        status,
        residue,
        trace: r.into_trace(),
    })
}

fn parse_vui(r: &mut TracingReader<'_>) -> Result<(ParamSet, Option<Hrd>, Option<Hrd>), H264Error> {
    let mut v = ParamSet::new(ParamSetKind::Vui);
    fn flag(r: &mut TracingReader<'_>, v: &mut ParamSet, name: &str) -> Result<bool, H264Error> {
        let f = r.u(name, 1)?;
        v.set_int(name, f);
        Ok(f == 1)
    }

    if flag(r, &mut v, "aspect_ratio_info_present_flag")? {
        let idc = r.u("aspect_ratio_idc", 8)?;
        v.set_int("aspect_ratio_idc", idc);
        if idc == 255 {
            v.set_int("sar_width", r.u("sar_width", 16)?);
            v.set_int("sar_height", r.u("sar_height", 16)?);
        }
    }
    if flag(r, &mut v, "overscan_info_present_flag")? {
        flag(r, &mut v, "overscan_appropriate_flag")?;
    }
    if flag(r, &mut v, "video_signal_type_present_flag")? {
        v.set_int("video_format", r.u("video_format", 3)?);
        flag(r, &mut v, "video_full_range_flag")?;
        if flag(r, &mut v, "colour_description_present_flag")? {
            v.set_int("colour_primaries", r.u("colour_primaries", 8)?);
            v.set_int("transfer_characteristics", r.u("transfer_characteristics", 8)?);
            v.set_int("matrix_coefficients", r.u("matrix_coefficients", 8)?);
        }
    }
    if flag(r, &mut v, "chroma_loc_info_present_flag")? {
        v.set_int(
            "chroma_sample_loc_type_top_field",
            r.ue_max("chroma_sample_loc_type_top_field", 5)?,
        );
        v.set_int(
            "chroma_sample_loc_type_bottom_field",
            r.ue_max("chroma_sample_loc_type_bottom_field", 5)?,
        );
    }
    if flag(r, &mut v, "timing_info_present_flag")? {
        v.set_int("num_units_in_tick", r.u("num_units_in_tick", 32)?);
        v.set_int("time_scale", r.u("time_scale", 32)?);
        flag(r, &mut v, "fixed_frame_rate_flag")?;
    }
    let nal_hrd = if flag(r, &mut v, "nal_hrd_parameters_present_flag")? {
        Some(parse_hrd(r)?)
    } else {
        None
    };
    let vcl_hrd = if flag(r, &mut v, "vcl_hrd_parameters_present_flag")? {
        Some(parse_hrd(r)?)
    } else {
        None
    };
    if nal_hrd.is_some() || vcl_hrd.is_some() {
        flag(r, &mut v, "low_delay_hrd_flag")?;
    }
    flag(r, &mut v, "pic_struct_present_flag")?;
    if flag(r, &mut v, "bitstream_restriction_flag")? {
        flag(r, &mut v, "motion_vectors_over_pic_boundaries_flag")?;
        for name in [
            "max_bytes_per_pic_denom",
            "max_bits_per_mb_denom",
            "log2_max_mv_length_horizontal",
            "log2_max_mv_length_vertical",
            "max_num_reorder_frames",
            "max_dec_frame_buffering",
        ] {
            let x = r.ue(name)?;
            v.set_int(name, x);
        }
    }
    Ok((v, nal_hrd, vcl_hrd))
}

fn parse_hrd(r: &mut TracingReader<'_>) -> Result<Hrd, H264Error> {
    let cpb_cnt_minus1 = r.ue_max("cpb_cnt_minus1", 31)? as u32;
    let bit_rate_scale = r.u("bit_rate_scale", 4)? as u8;
    let cpb_size_scale = r.u("cpb_size_scale", 4)? as u8;
    let n = cpb_cnt_minus1 as usize + 1;
    let mut hrd = Hrd {
        cpb_cnt_minus1,
        bit_rate_scale,
        cpb_size_scale,
        bit_rate_value_minus1: Vec::with_capacity(n),
        cpb_size_value_minus1: Vec::with_capacity(n),
        cbr_flag: Vec::with_capacity(n),
        initial_cpb_removal_delay_length_minus1: 0,
        cpb_removal_delay_length_minus1: 0,
        dpb_output_delay_length_minus1: 0,
        time_offset_length: 0,
    };
    for i in 0..n {
        hrd.bit_rate_value_minus1.push(r.ue(&format!("bit_rate_value_minus1[{i}]"))? as u32);
        hrd.cpb_size_value_minus1.push(r.ue(&format!("cpb_size_value_minus1[{i}]"))? as u32);
        hrd.cbr_flag.push(r.flag(&format!("cbr_flag[{i}]"))?);
    }
    hrd.initial_cpb_removal_delay_length_minus1 = r.u("initial_cpb_removal_delay_length_minus1", 5)? as u8;
    hrd.cpb_removal_delay_length_minus1 = r.u("cpb_removal_delay_length_minus1", 5)? as u8;
    hrd.dpb_output_delay_length_minus1 = r.u("dpb_output_delay_length_minus1", 5)? as u8;
    hrd.time_offset_length = r.u("time_offset_length", 5)? as u8;
    Ok(hrd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::h264::BitWriter;

    fn baseline_sps(vui: bool) -> Vec<u8> {
        let mut w = BitWriter::new();
        w.write_bits(0x67, 8);
        w.write_bits(66, 8);
        w.write_bits(0b1100_0000, 8);
        w.write_bits(30, 8);
        w.write_ue(0); // sps id
        w.write_ue(0); // log2_max_frame_num_minus4
        w.write_ue(2); // poc type
        w.write_ue(1); // max refs
        w.write_bit(false);
        w.write_ue(79);
        w.write_ue(44);
        w.write_bit(true); // frame_mbs_only
        w.write_bit(true);
        w.write_bit(false); // cropping
        w.write_bit(vui);
        if vui {
            w.write_bits(0, 4); // aspect, overscan, signal type, chroma loc
            w.write_bit(true);
            w.write_bits(1, 32);
            w.write_bits(50, 32);
            w.write_bit(true);
            w.write_bits(0, 4); // nal hrd, vcl hrd, pic_struct, restriction
        }
        w.write_trailing_bits();
        w.into_bytes()
    }

    #[test]
    fn leading_fixed_fields() {
        let sps = parse_sps(&baseline_sps(false)).unwrap();
        assert_eq!(&baseline_sps(false)[..3], &[0x67, 0x42, 0xC0]);
        assert_eq!(sps.params.int("profile_idc"), Some(66));
        assert_eq!(sps.params.int("level_idc"), Some(30));
        assert_eq!(sps.params.int("constraint_set0_flag"), Some(1));
        assert_eq!(sps.params.int("constraint_set2_flag"), Some(0));
    }

    #[test]
    fn baseline_without_vui() {
        let sps = parse_sps(&baseline_sps(false)).unwrap();
        assert!(sps.status.is_complete());
        assert!(sps.vui.is_none());
        assert_eq!(sps.params.len(), 38);
        assert!(sps.params.get("chroma_format_idc").unwrap().is_absent());
        assert_eq!(sps.frame_size(), Some((1280, 720)));
    }

    #[test]
    fn baseline_with_vui_timing() {
        let sps = parse_sps(&baseline_sps(true)).unwrap();
        let vui = sps.vui.as_ref().unwrap();
        assert_eq!(vui.len(), 32);
        assert_eq!(vui.int("time_scale"), Some(50));
        assert!(vui.get("low_delay_hrd_flag").unwrap().is_absent());
        assert!(sps.status.is_complete());
    }

    #[test]
    fn unknown_profile_is_partial_with_residue() {
        let mut w = BitWriter::new();
        w.write_bits(0x67, 8);
        w.write_bits(200, 8);
        w.write_bits(0, 8);
        w.write_bits(40, 8);
        w.write_ue(3);
        w.write_bits(0xABCD, 16);
        w.write_trailing_bits();
        let sps = parse_sps(&w.into_bytes()).unwrap();
        assert_eq!(sps.status, DecodeStatus::Partial(PartialReason::UnsupportedProfile(200)));
        assert_eq!(sps.id(), Some(3));
        assert!(!sps.residue.is_empty());
    }

    #[test]
    fn wrong_nal_type() {
        assert_eq!(
            parse_sps(&[0x68, 0xCE]).unwrap_err(),
            H264Error::WrongNalType { expected: 7, found: 8 }
        );
        assert_eq!(parse_sps(&[]).unwrap_err(), H264Error::EmptyNal);
    }

    #[test]
    fn truncated_is_exhausted() {
        let full = baseline_sps(false);
        let err = parse_sps(&full[..5]).unwrap_err();
        assert!(matches!(err, H264Error::BitstreamExhausted { .. }));
    }

    #[test]
    fn garbage_tail_is_flagged() {
        let mut blob = baseline_sps(false);
        blob.extend_from_slice(&[0x55, 0x01]);
        let sps = parse_sps(&blob).unwrap();
        assert_eq!(sps.status, DecodeStatus::Partial(PartialReason::BadTrailingBits));
    }
}
