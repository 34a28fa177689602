//! Parameter sets of the published experiments.
//!
//! Each preset is a list of labelled configurations. SNR grids are left to
//! the caller. Uncoupled baselines use a one-block window with `I_V` chosen
//! so that `2 w I_V I_H` equals the stated iteration budget.

use crate::codec::ScPccParams;
use crate::csoc::CsocCode;
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 3] = ["fig4", "fig5", "fig6"];

/// Source blocks per frame for the short-block comparison.
pub const PRESET_FRAME_BLOCKS: usize = 20;

/// Source blocks per frame for the long-block and high-rate presets.
pub const PRESET_LONG_FRAME_BLOCKS: usize = 8;

/// Extrinsic scale used by the presets. Unscaled threshold-decoding
/// extrinsics are overconfident at waterfall SNRs and iterations diverge.
pub const PRESET_EXTRINSIC_SCALE: f64 = 0.6;

/// An uncoupled PCC with `iterations` turbo iterations in total.
pub fn pcc(code: CsocCode, block_size: usize, iterations: usize, frame_blocks: usize) -> ScPccParams {
    let mut p = ScPccParams::new(code, block_size, 0, frame_blocks);
    p.extrinsic_scale = PRESET_EXTRINSIC_SCALE;
    p.window = 1;
    p.vertical_iterations = iterations.div_ceil(2);
    p.horizontal_iterations = 1;
    p
}

/// A coupled code with an explicit decoder schedule.
pub fn scpcc(
    code: CsocCode,
    block_size: usize,
    coupling_memory: usize,
    window: usize,
    vertical: usize,
    horizontal: usize,
    frame_blocks: usize,
) -> ScPccParams {
    let mut p = ScPccParams::new(code, block_size, coupling_memory, frame_blocks);
    p.extrinsic_scale = PRESET_EXTRINSIC_SCALE;
    p.window = window;
    p.vertical_iterations = vertical;
    p.horizontal_iterations = horizontal;
    p
}

/// Rate-1/2 coupling-gain comparison: equal-latency PCC/SC-PCC pairs with
/// 24 vertical iterations each.
pub fn fig4() -> Vec<(String, ScPccParams)> {
    let code = CsocCode::rate_two_thirds_j4;
    let l = PRESET_FRAME_BLOCKS;
    vec![
        ("pcc-t1200".into(), pcc(code(), 1200, 24, l)),
        ("scpcc-t400".into(), scpcc(code(), 400, 1, 3, 1, 4, l)),
        ("pcc-t3000".into(), pcc(code(), 3000, 24, l)),
        ("scpcc-t1000".into(), scpcc(code(), 1000, 1, 3, 1, 4, l)),
    ]
}

/// Window-size study, `T = 9990`, `m_sc = 1`, `w = 2..=12`.
pub fn fig5() -> Vec<(String, ScPccParams)> {
    (2..=12)
        .map(|w| {
            (
                format!("scpcc-w{w}"),
                scpcc(CsocCode::rate_two_thirds_j4(), 9990, 1, w, 1, 4, PRESET_LONG_FRAME_BLOCKS),
            )
        })
        .collect()
}

/// High-rate comparison with a `k = 8`, `J = 4` component code.
///
/// `T = 999` for `m_sc = 2` keeps the block divisible into three sub-blocks.
pub fn fig6(code: CsocCode) -> Result<Vec<(String, ScPccParams)>> {
    if code.k() != 8 || code.j() != 4 {
        return Err(Error::InvalidParams(format!(
            "the high-rate preset needs a k = 8, J = 4 code, got k = {}, J = {}",
            code.k(),
            code.j()
        )));
    }
    let l = PRESET_LONG_FRAME_BLOCKS;
    Ok(vec![
        ("pcc-t1000".into(), pcc(code.clone(), 1000, 16, l)),
        ("scpcc-msc1".into(), scpcc(code.clone(), 1000, 1, 4, 4, 2, l)),
        ("scpcc-msc2".into(), scpcc(code, 999, 2, 4, 4, 2, l)),
    ])
}

/// Looks up a preset by name; `fig6` requires `code`.
pub fn preset(name: &str, code: Option<CsocCode>) -> Result<Vec<(String, ScPccParams)>> {
    match name {
        "fig4" => Ok(fig4()),
        "fig5" => Ok(fig5()),
        "fig6" => fig6(code.ok_or_else(|| {
            Error::InvalidParams(
                "the fig6 preset needs a k = 8, J = 4 code file (--code); generate one with `search-code --k 8 --j 4`".into(),
            )
        })?),
        other => Err(Error::InvalidParams(format!(
            "unknown preset {other:?} (expected one of {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}
