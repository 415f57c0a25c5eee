use serde::{Deserialize, Serialize};

use super::{EncodingSetting, H264Error};
use crate::Scalar;

/// Fixed order of the partial-file feature vector. The first ten come from
/// the SPS and the first PPS; the last is the caller-supplied picture height.
pub const CORE_PARAM_NAMES: [&str; 11] = [
    "log2_max_frame_num_minus4",
    "pic_order_cnt_type",
    "log2_max_pic_order_cnt_lsb_minus4",
    "frame_mbs_only_flag",
    "deblocking_filter_control_present_flag",
    "entropy_coding_mode_flag",
    "pic_width_in_mbs_minus1",
    "pic_init_qp_minus26",
    "frame_cropping_flag",
    "frame_crop_bottom_offset",
    "height",
];

/// Coordinates a user can change from camera settings (frame size and the
/// cropping that follows from it).
pub const USER_ADJUSTABLE_CORE: [usize; 4] = [6, 8, 9, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoreParams {
    pub values: [i64; 11],
}

impl CoreParams {
    pub fn to_vec<F: Scalar>(&self) -> Vec<F> {
        self.values.iter().map(|&v| F::from_f64_lossy(v as f64)).collect()
    }

    /// The vector with the user-adjustable coordinates removed.
    pub fn without_user_adjustable(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| !USER_ADJUSTABLE_CORE.contains(i))
            .map(|(_, &v)| v)
            .collect()
    }
}

/// Projects a setting onto the 11 core coordinates. The POC LSB width is -1
/// when `pic_order_cnt_type` does not signal it; an unsignalled crop offset
/// is 0.
pub fn core_param_vector(setting: &EncodingSetting, height: u32) -> Result<CoreParams, H264Error> {
    let sps = &setting.sps.params;
    let pps = setting
        .pps
        .first()
        .map(|p| &p.params)
        .ok_or(H264Error::MissingParameter("entropy_coding_mode_flag"))?;
    let need = |set: &super::ParamSet, idx: usize| {
        let name = CORE_PARAM_NAMES[idx];
        set.int(name).ok_or(H264Error::MissingParameter(name))
    };

    let poc_type = need(sps, 1)?;
    let poc_lsb = if poc_type == 0 { need(sps, 2)? } else { -1 };
    let cropping = need(sps, 8)?;
    let crop_bottom = if cropping == 1 { need(sps, 9)? } else { 0 };
    Ok(CoreParams {
        values: [
            need(sps, 0)?,
            poc_type,
            poc_lsb,
            need(sps, 3)?,
            need(pps, 4)?,
            need(pps, 5)?,
            need(sps, 6)?,
            need(pps, 7)?,
            cropping,
            crop_bottom,
            i64::from(height),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::h264::{parse_pps, parse_sps, BitWriter};

    fn setting(cropping: bool) -> EncodingSetting {
        let mut w = BitWriter::new();
        w.write_bits(0x67, 8);
        w.write_bits(77, 8);
        w.write_bits(0x40, 8);
        w.write_bits(31, 8);
        w.write_ue(0);
        w.write_ue(0);
        w.write_ue(0);
        w.write_ue(2);
        w.write_ue(1);
        w.write_bit(false);
        w.write_ue(79);
        w.write_ue(44);
        w.write_bit(true);
        w.write_bit(true);
        w.write_bit(cropping);
        if cropping {
            w.write_ue(0);
            w.write_ue(0);
            w.write_ue(0);
            w.write_ue(0);
        }
        w.write_bit(false);
        w.write_trailing_bits();
        let sps = parse_sps(&w.into_bytes()).unwrap();
        let mut w = BitWriter::new();
        w.write_bits(0x68, 8);
        w.write_ue(0);
        w.write_ue(0);
        w.write_bit(true);
        w.write_bit(false);
        w.write_ue(0);
        w.write_ue(0);
        w.write_ue(0);
        w.write_bit(false);
        w.write_bits(0, 2);
        w.write_se(0);
        w.write_se(0);
        w.write_se(0);
        w.write_bit(true);
        w.write_bit(false);
        w.write_bit(false);
        w.write_trailing_bits();
        let pps = parse_pps(&w.into_bytes(), Some(&sps)).unwrap();
        EncodingSetting::new(sps, vec![pps]).unwrap()
    }

    #[test]
    fn projection_values() {
        let v = core_param_vector(&setting(false), 720).unwrap();
        assert_eq!(v.values[6], 79);
        assert_eq!(v.values[7], 0);
        assert_eq!(v.values[10], 720);
        assert_eq!(v.values[2], 2);
    }

    #[test]
    fn cropping_flag_changes_one_coordinate() {
        let a = core_param_vector(&setting(false), 720).unwrap();
        let b = core_param_vector(&setting(true), 720).unwrap();
        let diff = a.values.iter().zip(&b.values).filter(|(x, y)| x != y).count();
        assert_eq!(diff, 1);
        assert_eq!(a, core_param_vector(&setting(false), 720).unwrap());
    }

    #[test]
    fn missing_pps() {
        let mut s = setting(false);
        s.pps.clear();
        assert!(matches!(core_param_vector(&s, 720), Err(H264Error::MissingParameter(_))));
    }

    #[test]
    fn reduced_vector() {
        let v = core_param_vector(&setting(false), 720).unwrap();
        assert_eq!(v.without_user_adjustable().len(), 7);
    }
}
