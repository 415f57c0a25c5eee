//! Seeded generator of small, well-formed MP4 files whose container layout
//! and codec headers are controlled per class.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::h264::bits::{escape_rbsp, BitWriter};

pub const BRANDS: [&[u8; 4]; 5] = [b"isom", b"mp42", b"qt  ", b"3gp4", b"avc1"];
const ENCODERS: [&str; 4] = ["Lavf58.76.100", "CamOS 2.1", "HW Encoder", "MediaWriter 7"];
const DIMS: [(u32, u32); 4] = [(640, 480), (1280, 720), (1920, 1080), (720, 576)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub samples_per_class: usize,
    pub seed: u64,
    /// The last `2 * clone_pairs` classes come in pairs sharing one recipe.
    pub clone_pairs: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec { classes: 12, samples_per_class: 20, seed: 0, clone_pairs: 0 }
    }
}

/// Container layout choices; every field changes the tree structure or a
/// categorical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layout {
    pub moov_first: bool,
    pub free_box: bool,
    pub udta: bool,
    pub audio_track: bool,
    pub edts: bool,
    pub uuid_box: bool,
    pub pasp: bool,
    pub btrt: bool,
    pub colr: bool,
    /// Index into [`BRANDS`].
    pub brand: usize,
    /// Index into the encoder names written to `udta`.
    pub encoder: usize,
    pub movie_timescale: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodecRecipe {
    pub profile_idc: u8,
    pub level_idc: u8,
    pub width: u32,
    pub height: u32,
    pub log2_max_frame_num_minus4: u32,
    pub poc_type: u32,
    pub num_ref_frames: u32,
    pub vui: bool,
    pub video_signal: bool,
    pub fps: u32,
    pub cabac: bool,
    pub pic_init_qp_minus26: i32,
    pub chroma_qp_index_offset: i32,
    pub deblocking_control: bool,
    pub transform_8x8: bool,
    pub extra_pps: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecipe {
    pub name: String,
    pub layout: Layout,
    pub codec: CodecRecipe,
    /// Class whose recipe this one copies.
    pub clone_of: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticFile {
    pub class: usize,
    pub file_name: String,
    pub bytes: Vec<u8>,
}

/// `Brand<X>_M<nn>`, three models per brand.
pub fn class_name(i: usize) -> String {
    let brand = (b'A' + (i / 3 % 26) as u8) as char;
    let cycle = i / 78;
    if cycle == 0 {
        format!("Brand{brand}_M{i:02}")
    } else {
        format!("Brand{brand}{cycle}_M{i:02}")
    }
}

/// The part of a class name before the first `_`.
pub fn brand_of(name: &str) -> &str {
    name.split('_').next().unwrap_or(name)
}

fn random_layout(rng: &mut ChaCha8Rng) -> Layout {
    Layout {
        moov_first: rng.gen(),
        free_box: rng.gen(),
        udta: rng.gen(),
        audio_track: rng.gen(),
        edts: rng.gen(),
        uuid_box: rng.gen_bool(0.25),
        pasp: rng.gen(),
        btrt: rng.gen(),
        colr: rng.gen(),
        brand: rng.gen_range(0..BRANDS.len()),
        encoder: rng.gen_range(0..ENCODERS.len()),
        movie_timescale: *[600u32, 1000, 90000].choose(rng).unwrap(),
    }
}

/// Class `i` gets a distinct base QP (and, past 26 classes, a distinct
/// reference count), so no two recipes coincide.
fn random_codec(rng: &mut ChaCha8Rng, i: usize) -> CodecRecipe {
    let profile_idc = *[66u8, 77, 100].choose(rng).unwrap();
    let (width, height) = *DIMS.choose(rng).unwrap();
    let vui = rng.gen();
    CodecRecipe {
        profile_idc,
        level_idc: *[30u8, 31, 40, 41].choose(rng).unwrap(),
        width,
        height,
        log2_max_frame_num_minus4: rng.gen_range(0..5),
        poc_type: if profile_idc == 66 { *[0u32, 2].choose(rng).unwrap() } else { 0 },
        num_ref_frames: 1 + (i / 26 % 4) as u32,
        vui,
        video_signal: vui && rng.gen(),
        fps: *[25u32, 30, 60].choose(rng).unwrap(),
        cabac: profile_idc != 66 && rng.gen(),
        pic_init_qp_minus26: -12 + (i % 26) as i32,
        chroma_qp_index_offset: rng.gen_range(-2..=2),
        deblocking_control: rng.gen(),
        transform_8x8: profile_idc == 100 && rng.gen(),
        extra_pps: rng.gen_bool(0.2),
    }
}

/// Layouts are drawn from a pool of about a third as many layouts as
/// classes, so several classes share a metaclass and are told apart by
/// their codec headers.
pub fn class_recipes(spec: &SyntheticSpec) -> Vec<ClassRecipe> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pool_len = spec.classes.div_ceil(3).max(1);
    let mut pool: Vec<Layout> = Vec::with_capacity(pool_len);
    while pool.len() < pool_len {
        let l = random_layout(&mut rng);
        if !pool.contains(&l) {
            pool.push(l);
        }
    }
    let cloned_from = spec.classes.saturating_sub(2 * spec.clone_pairs);
    let mut out: Vec<ClassRecipe> = Vec::with_capacity(spec.classes);
    for i in 0..spec.classes {
        if i >= cloned_from && (i - cloned_from) % 2 == 1 {
            let src = out[i - 1].clone();
            out.push(ClassRecipe { name: class_name(i), clone_of: Some(i - 1), ..src });
            continue;
        }
        let layout = pool[i % pool_len];
        let codec = random_codec(&mut rng, i);
        out.push(ClassRecipe { name: class_name(i), layout, codec, clone_of: None });
    }
    out
}

/// Every file of every class, classes in order.
pub fn generate(spec: &SyntheticSpec) -> Vec<SyntheticFile> {
    let recipes = class_recipes(spec);
    let mut out = Vec::with_capacity(spec.classes * spec.samples_per_class);
    for (c, r) in recipes.iter().enumerate() {
        for s in 0..spec.samples_per_class {
            let mut rng = sample_rng(spec.seed, c, s);
            out.push(SyntheticFile {
                class: c,
                file_name: format!("{}_{s:03}.mp4", r.name),
                bytes: build_file(&r.layout, &r.codec, &mut rng),
            });
        }
    }
    out
}

pub fn sample_rng(seed: u64, class: usize, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_F11E);
    rng.set_stream(((class as u64) << 32) | sample as u64);
    rng
}

fn cropped(height: u32) -> (u32, u32) {
    let mbs = height.div_ceil(16);
    (mbs - 1, (mbs * 16 - height) / 2)
}

/// SPS NAL unit, header byte included.
pub fn encode_sps(c: &CodecRecipe) -> Vec<u8> {
    let mut w = BitWriter::new();
    w.write_bits(u64::from(c.profile_idc), 8);
    let constraints: u64 = match c.profile_idc {
        66 => 0b1100_0000,
        77 => 0b0100_0000,
        _ => 0,
    };
    w.write_bits(constraints, 8);
    w.write_bits(u64::from(c.level_idc), 8);
    w.write_ue(0);
    if c.profile_idc == 100 {
        w.write_ue(1);
        w.write_ue(0);
        w.write_ue(0);
        w.write_bit(false);
        w.write_bit(false);
    }
    w.write_ue(u64::from(c.log2_max_frame_num_minus4));
    w.write_ue(u64::from(c.poc_type));
    if c.poc_type == 0 {
        w.write_ue(u64::from(c.log2_max_frame_num_minus4 + 1));
    }
    w.write_ue(u64::from(c.num_ref_frames));
    w.write_bit(false);
    w.write_ue(u64::from(c.width / 16 - 1));
    let (h_minus1, crop) = cropped(c.height);
    w.write_ue(u64::from(h_minus1));
    w.write_bit(true);
    w.write_bit(true);
    w.write_bit(crop > 0);
    if crop > 0 {
        w.write_ue(0);
        w.write_ue(0);
        w.write_ue(0);
        w.write_ue(u64::from(crop));
    }
    w.write_bit(c.vui);
    if c.vui {
        w.write_bit(true);
        w.write_bits(1, 8);
        w.write_bit(false);
        w.write_bit(c.video_signal);
        if c.video_signal {
            w.write_bits(5, 3);
            w.write_bit(false);
            w.write_bit(true);
            w.write_bits(1, 8);
            w.write_bits(1, 8);
            w.write_bits(1, 8);
        }
        w.write_bit(false);
        w.write_bit(true);
        w.write_bits(1001, 32);
        w.write_bits(u64::from(c.fps) * 2000, 32);
        w.write_bit(true);
        w.write_bit(false);
        w.write_bit(false);
        w.write_bit(false);
        w.write_bit(true);
        w.write_bit(true);
        w.write_ue(0);
        w.write_ue(0);
        w.write_ue(16);
        w.write_ue(16);
        w.write_ue(u64::from(c.poc_type == 0));
        w.write_ue(u64::from(c.num_ref_frames));
    }
    w.write_trailing_bits();
    nal(0x67, &w.into_bytes())
}

/// PPS NAL unit with the given id, header byte included.
pub fn encode_pps(c: &CodecRecipe, pps_id: u32) -> Vec<u8> {
    let mut w = BitWriter::new();
    w.write_ue(u64::from(pps_id));
    w.write_ue(0);
    w.write_bit(c.cabac);
    w.write_bit(false);
    w.write_ue(0);
    w.write_ue(u64::from(c.num_ref_frames.saturating_sub(1)));
    w.write_ue(0);
    w.write_bit(false);
    w.write_bits(0, 2);
    w.write_se(i64::from(c.pic_init_qp_minus26));
    w.write_se(0);
    w.write_se(i64::from(c.chroma_qp_index_offset));
    w.write_bit(c.deblocking_control);
    w.write_bit(false);
    w.write_bit(false);
    if c.transform_8x8 {
        w.write_bit(true);
        w.write_bit(false);
        w.write_se(i64::from(c.chroma_qp_index_offset));
    }
    w.write_trailing_bits();
    nal(0x68, &w.into_bytes())
}

fn nal(header: u8, rbsp: &[u8]) -> Vec<u8> {
    let mut v = vec![header];
    v.extend(escape_rbsp(rbsp));
    v
}

pub fn bx(t: &[u8; 4], body: &[u8]) -> Vec<u8> {
    let mut v = ((body.len() + 8) as u32).to_be_bytes().to_vec();
    v.extend_from_slice(t);
    v.extend_from_slice(body);
    v
}

fn full(t: &[u8; 4], version: u8, flags: u32, body: &[u8]) -> Vec<u8> {
    let mut p = vec![version];
    p.extend_from_slice(&flags.to_be_bytes()[1..]);
    p.extend_from_slice(body);
    bx(t, &p)
}

fn be32(v: u32) -> [u8; 4] {
    v.to_be_bytes()
}

fn be16(v: u16) -> [u8; 2] {
    v.to_be_bytes()
}

const MATRIX: [u32; 9] = [0x10000, 0, 0, 0, 0x10000, 0, 0, 0, 0x4000_0000];

fn matrix() -> Vec<u8> {
    MATRIX.iter().flat_map(|v| v.to_be_bytes()).collect()
}

struct Sample {
    created: u32,
    duration_ms: u32,
    sizes: Vec<u32>,
    keyframes: u32,
    bitrate: u32,
    location: String,
}

fn random_sample(rng: &mut ChaCha8Rng) -> Sample {
    let n = rng.gen_range(8..40);
    Sample {
        created: rng.gen_range(3_600_000_000..3_800_000_000),
        duration_ms: rng.gen_range(1_000..60_000),
        sizes: (0..n).map(|_| rng.gen_range(8..48)).collect(),
        keyframes: rng.gen_range(1..4),
        bitrate: rng.gen_range(1_000_000..20_000_000),
        location: format!("{:+08.4}{:+09.4}/", rng.gen_range(-90.0..90.0), rng.gen_range(-180.0..180.0)),
    }
}

fn mvhd(l: &Layout, s: &Sample, next_track: u32) -> Vec<u8> {
    let mut p = Vec::new();
    p.extend(be32(s.created));
    p.extend(be32(s.created));
    p.extend(be32(l.movie_timescale));
    p.extend(be32((u64::from(s.duration_ms) * u64::from(l.movie_timescale) / 1000) as u32));
    p.extend(be32(0x10000));
    p.extend(be16(0x100));
    p.extend([0u8; 10]);
    p.extend(matrix());
    p.extend([0u8; 24]);
    p.extend(be32(next_track));
    full(b"mvhd", 0, 0, &p)
}

fn tkhd(track_id: u32, s: &Sample, l: &Layout, audio: bool, w: u32, h: u32) -> Vec<u8> {
    let mut p = Vec::new();
    p.extend(be32(s.created));
    p.extend(be32(s.created));
    p.extend(be32(track_id));
    p.extend([0u8; 4]);
    p.extend(be32((u64::from(s.duration_ms) * u64::from(l.movie_timescale) / 1000) as u32));
    p.extend([0u8; 8]);
    p.extend(be16(0));
    p.extend(be16(u16::from(audio)));
    p.extend(be16(if audio { 0x100 } else { 0 }));
    p.extend([0u8; 2]);
    p.extend(matrix());
    p.extend(be32(w << 16));
    p.extend(be32(h << 16));
    full(b"tkhd", 0, 3, &p)
}

fn mdhd(timescale: u32, s: &Sample) -> Vec<u8> {
    let mut p = Vec::new();
    p.extend(be32(s.created));
    p.extend(be32(s.created));
    p.extend(be32(timescale));
    p.extend(be32((u64::from(s.duration_ms) * u64::from(timescale) / 1000) as u32));
    p.extend(be16(0x55C4));
    p.extend(be16(0));
    full(b"mdhd", 0, 0, &p)
}

fn hdlr(kind: &[u8; 4], name: &str) -> Vec<u8> {
    let mut p = Vec::new();
    p.extend([0u8; 4]);
    p.extend(kind);
    p.extend([0u8; 12]);
    p.extend(name.as_bytes());
    p.push(0);
    full(b"hdlr", 0, 0, &p)
}

fn dinf() -> Vec<u8> {
    let url = full(b"url ", 0, 1, &[]);
    let mut d = be32(1).to_vec();
    d.extend(url);
    bx(b"dinf", &full(b"dref", 0, 0, &d))
}

fn sample_tables(entry: Vec<u8>, s: &Sample, delta: u32, first_offset: u32, keyframes: bool) -> Vec<u8> {
    let n = s.sizes.len() as u32;
    let mut stsd = be32(1).to_vec();
    stsd.extend(entry);
    let mut out = full(b"stsd", 0, 0, &stsd);
    let mut stts = be32(1).to_vec();
    stts.extend(be32(n));
    stts.extend(be32(delta));
    out.extend(full(b"stts", 0, 0, &stts));
    if keyframes {
        let mut stss = be32(s.keyframes).to_vec();
        for k in 0..s.keyframes {
            stss.extend(be32(1 + k * (n / s.keyframes).max(1)));
        }
        out.extend(full(b"stss", 0, 0, &stss));
    }
    let mut stsc = be32(1).to_vec();
    stsc.extend(be32(1));
    stsc.extend(be32(n));
    stsc.extend(be32(1));
    out.extend(full(b"stsc", 0, 0, &stsc));
    let mut stsz = be32(0).to_vec();
    stsz.extend(be32(n));
    for &z in &s.sizes {
        stsz.extend(be32(z));
    }
    out.extend(full(b"stsz", 0, 0, &stsz));
    let mut stco = be32(1).to_vec();
    stco.extend(be32(first_offset));
    out.extend(full(b"stco", 0, 0, &stco));
    bx(b"stbl", &out)
}

fn avc1(l: &Layout, c: &CodecRecipe, s: &Sample) -> Vec<u8> {
    let mut p = vec![0u8; 6];
    p.extend(be16(1));
    p.extend([0u8; 16]);
    p.extend(be16(c.width as u16));
    p.extend(be16(c.height as u16));
    p.extend(be32(0x48_0000));
    p.extend(be32(0x48_0000));
    p.extend([0u8; 4]);
    p.extend(be16(1));
    let mut name = [0u8; 32];
    let enc = ENCODERS[l.encoder].as_bytes();
    name[0] = enc.len() as u8;
    name[1..=enc.len()].copy_from_slice(enc);
    p.extend(name);
    p.extend(be16(0x18));
    p.extend(be16(0xFFFF));

    let sps = encode_sps(c);
    let pps: Vec<Vec<u8>> = (0..1 + u32::from(c.extra_pps)).map(|i| encode_pps(c, i)).collect();
    let mut rec = vec![1, c.profile_idc, if c.profile_idc == 66 { 0xC0 } else { 0 }, c.level_idc, 0xFF, 0xE1];
    rec.extend(be16(sps.len() as u16));
    rec.extend(&sps);
    rec.push(pps.len() as u8);
    for q in &pps {
        rec.extend(be16(q.len() as u16));
        rec.extend(q);
    }
    p.extend(bx(b"avcC", &rec));
    if l.pasp {
        p.extend(bx(b"pasp", &[be32(1), be32(1)].concat()));
    }
    if l.btrt {
        p.extend(bx(b"btrt", &[be32(s.bitrate / 8), be32(s.bitrate + s.bitrate / 4), be32(s.bitrate)].concat()));
    }
    if l.colr {
        let mut col = b"nclx".to_vec();
        col.extend(be16(1));
        col.extend(be16(1));
        col.extend(be16(1));
        col.push(0);
        p.extend(bx(b"colr", &col));
    }
    bx(b"avc1", &p)
}

fn mp4a() -> Vec<u8> {
    let mut p = vec![0u8; 6];
    p.extend(be16(1));
    p.extend([0u8; 8]);
    p.extend(be16(2));
    p.extend(be16(16));
    p.extend([0u8; 4]);
    p.extend(be32(48000 << 16));
    p.extend(bx(b"esds", &[0, 0, 0, 0, 3, 25, 0, 2, 0]));
    bx(b"mp4a", &p)
}

fn video_trak(l: &Layout, c: &CodecRecipe, s: &Sample, offset: u32) -> Vec<u8> {
    let mut t = tkhd(1, s, l, false, c.width, c.height);
    if l.edts {
        let mut e = be32(1).to_vec();
        e.extend(be32((u64::from(s.duration_ms) * u64::from(l.movie_timescale) / 1000) as u32));
        e.extend(be32(0));
        e.extend(be32(0x10000));
        t.extend(bx(b"edts", &full(b"elst", 0, 0, &e)));
    }
    let timescale = c.fps * 1000;
    let mut minf = full(b"vmhd", 0, 1, &[0u8; 8]);
    minf.extend(dinf());
    minf.extend(sample_tables(avc1(l, c, s), s, 1000, offset, true));
    let mut mdia = mdhd(timescale, s);
    mdia.extend(hdlr(b"vide", "VideoHandler"));
    mdia.extend(bx(b"minf", &minf));
    t.extend(bx(b"mdia", &mdia));
    bx(b"trak", &t)
}

fn audio_trak(l: &Layout, s: &Sample, offset: u32) -> Vec<u8> {
    let mut t = tkhd(2, s, l, true, 0, 0);
    let mut minf = full(b"smhd", 0, 0, &[0u8; 4]);
    minf.extend(dinf());
    minf.extend(sample_tables(mp4a(), s, 1024, offset, false));
    let mut mdia = mdhd(48000, s);
    mdia.extend(hdlr(b"soun", "SoundHandler"));
    mdia.extend(bx(b"minf", &minf));
    t.extend(bx(b"mdia", &mdia));
    bx(b"trak", &t)
}

fn udta(l: &Layout, s: &Sample) -> Vec<u8> {
    let item = |t: &[u8; 4], text: &str| {
        let mut p = be16(text.len() as u16).to_vec();
        p.extend(be16(0x15C7));
        p.extend(text.as_bytes());
        bx(t, &p)
    };
    let mut p = item(b"\xA9too", ENCODERS[l.encoder]);
    p.extend(item(b"\xA9xyz", &s.location));
    bx(b"udta", &p)
}

/// One file of the given layout and codec recipe; only content-volatile
/// values depend on `rng`.
pub fn build_file(l: &Layout, c: &CodecRecipe, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let s = random_sample(rng);
    let mut ftyp = BRANDS[l.brand].to_vec();
    ftyp.extend(be32(0x200));
    ftyp.extend(BRANDS[l.brand]);
    ftyp.extend(b"mp41");
    let ftyp = bx(b"ftyp", &ftyp);
    let free = if l.free_box { bx(b"free", &[0u8; 8]) } else { Vec::new() };
    let uuid = if l.uuid_box {
        let mut u = vec![0xBE, 0x7A, 0xCF, 0xCB, 0x97, 0xA9, 0x42, 0xE8, 0x9C, 0x71, 0x99, 0x94, 0x91, 0xE3, 0xAF, 0xAC];
        u.extend(b"<xmp/>");
        bx(b"uuid", &u)
    } else {
        Vec::new()
    };
    let media: Vec<u8> = s.sizes.iter().flat_map(|&z| std::iter::repeat_n(0xA5u8, z as usize)).collect();
    let mdat = bx(b"mdat", &media);

    let moov = |offset: u32| {
        let mut m = mvhd(l, &s, 2 + u32::from(l.audio_track));
        m.extend(video_trak(l, c, &s, offset));
        if l.audio_track {
            m.extend(audio_trak(l, &s, offset));
        }
        if l.udta {
            m.extend(udta(l, &s));
        }
        bx(b"moov", &m)
    };
    let head = ftyp.len() + free.len() + uuid.len();
    let mut out = Vec::new();
    out.extend(&ftyp);
    out.extend(&free);
    out.extend(&uuid);
    if l.moov_first {
        let size = moov(0).len();
        out.extend(moov((head + size + 8) as u32));
        out.extend(&mdat);
    } else {
        out.extend(&mdat);
        out.extend(moov((head + 8) as u32));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bmff::parse_boxes;
    use crate::h264::{parse_pps, parse_sps};

    #[test]
    fn headers_decode_back() {
        let spec = SyntheticSpec { classes: 30, ..SyntheticSpec::default() };
        for r in class_recipes(&spec) {
            let c = &r.codec;
            let sps = parse_sps(&encode_sps(c)).unwrap();
            assert!(sps.status.is_complete(), "{c:?}");
            assert_eq!(sps.frame_size(), Some((c.width, c.height)));
            let pps = parse_pps(&encode_pps(c, 1), Some(&sps)).unwrap();
            assert!(pps.status.is_complete(), "{c:?}");
            assert_eq!(pps.params.int("pic_init_qp_minus26"), Some(i64::from(c.pic_init_qp_minus26)));
            assert_eq!(sps.vui.is_some(), c.vui);
        }
    }

    #[test]
    fn files_parse_clean() {
        for f in generate(&SyntheticSpec { classes: 9, samples_per_class: 2, seed: 3, clone_pairs: 1 }) {
            let t = parse_boxes(&f.bytes).unwrap();
            assert!(t.truncated.is_none());
            t.walk(|n, _| assert!(!n.malformed, "{} malformed in {}", n.box_type, f.file_name));
        }
    }

    #[test]
    fn recipes_distinct_except_clones() {
        let spec = SyntheticSpec { classes: 12, samples_per_class: 1, seed: 9, clone_pairs: 2 };
        let r = class_recipes(&spec);
        assert_eq!(r[9].clone_of, Some(8));
        assert_eq!(r[11].clone_of, Some(10));
        assert_eq!((r[9].layout, r[9].codec), (r[8].layout, r[8].codec));
        for i in 0..12 {
            for j in 0..i {
                if r[i].clone_of != Some(j) {
                    assert_ne!((r[i].layout, r[i].codec), (r[j].layout, r[j].codec));
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let spec = SyntheticSpec { classes: 3, samples_per_class: 2, seed: 5, clone_pairs: 0 };
        assert_eq!(generate(&spec), generate(&spec));
        assert_ne!(generate(&spec)[0].bytes, generate(&spec)[1].bytes);
    }

    #[test]
    fn names() {
        assert_eq!(class_name(0), "BrandA_M00");
        assert_eq!(class_name(4), "BrandB_M04");
        assert_eq!(brand_of("BrandB_M04"), "BrandB");
    }
}
