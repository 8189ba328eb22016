//! In-loop filter stages over whole frames, and the encoder's choice of
//! their parameters by measured squared error.

use crate::error::{Error, Result};
use crate::frame::{Frame, Plane};
use crate::loopfilter::cdef::{cdef_plane, CdefParams, CdefStrength};
use crate::loopfilter::deblock::{deblock_plane, DeblockParams, PlaneKind, TxGrid};
use crate::loopfilter::restoration::{choose_self_guided, restore_plane, restore_unit, RestorationMode, RestorationPlan};
use crate::loopfilter::sgr::{squared_error, SgrParams};
use crate::loopfilter::superres::{downscale_plane, upscale_plane, SuperresParams};
use crate::loopfilter::wiener::WienerTaps;
use crate::loopfilter::{is_ordered, Stage};
use crate::txfm::quant::{step_size, Band};
use crate::txfm::COEFF_SCALE;

use super::FrameHeader;

fn plane_kind(i: usize) -> PlaneKind {
    if i == 0 {
        PlaneKind::Luma
    } else {
        PlaneKind::Chroma
    }
}

fn plane_sse(a: &Plane, b: &Plane) -> u64 {
    a.data().iter().zip(b.data()).map(|(&x, &y)| (x as i64 - y as i64).pow(2) as u64).sum()
}

fn rebuild(f: &Frame, planes: Vec<Plane>) -> Result<Frame> {
    let mut it = planes.into_iter();
    let y = it.next().ok_or_else(|| Error::InvalidArgument("frame without planes".into()))?;
    Frame::from_planes(y, it.next(), it.next(), f.format)
}

/// Quantizer step in sample units.
fn sample_step(base_qp: u8, bit_depth: u32) -> u32 {
    (step_size(base_qp, Band::Ac, bit_depth) / COEFF_SCALE as u32).max(1)
}

pub(crate) fn deblock_frame(f: &mut Frame, grids: &[TxGrid], params: &[DeblockParams]) {
    for (i, p) in f.planes_mut().into_iter().enumerate() {
        deblock_plane(p, &grids[i], params[i], params[i], plane_kind(i));
    }
}

fn cdef_strength<'a>(p: &'a CdefParams, plane: &Plane, luma_width: usize, i: usize) -> impl Fn(usize, usize) -> CdefStrength + 'a {
    let (sx, sy) = (plane.ss_x, plane.ss_y);
    move |x, y| {
        let g = p.groups[p.group_at(x << sx, y << sy, luma_width)];
        if i == 0 {
            g.0
        } else {
            g.1
        }
    }
}

pub(crate) fn cdef_frame(f: &Frame, p: &CdefParams) -> Result<Frame> {
    let planes = f.planes().into_iter().enumerate().map(|(i, pl)| cdef_plane(pl, p.damping, cdef_strength(p, pl, f.width(), i)).0).collect();
    rebuild(f, planes)
}

/// Scaling of a subsampled plane implied by the luma scaling.
pub(crate) fn plane_superres(luma: SuperresParams, ss_x: u32) -> Result<SuperresParams> {
    let shrink = |v: usize| (v + (1 << ss_x) - 1) >> ss_x;
    SuperresParams::new(shrink(luma.downscaled), shrink(luma.upscaled))
}

pub(crate) fn superres_frame(f: &Frame, p: SuperresParams) -> Result<Frame> {
    let planes = f.planes().into_iter().map(|pl| upscale_plane(pl, plane_superres(p, pl.ss_x)?)).collect::<Result<Vec<_>>>()?;
    rebuild(f, planes)
}

pub(crate) fn downscale_frame(f: &Frame, p: SuperresParams) -> Result<Frame> {
    let planes = f.planes().into_iter().map(|pl| downscale_plane(pl, plane_superres(p, pl.ss_x)?)).collect::<Result<Vec<_>>>()?;
    rebuild(f, planes)
}

pub(crate) fn restore_frame(f: &Frame, plans: &[Option<RestorationPlan>]) -> Result<Frame> {
    let planes = f
        .planes()
        .into_iter()
        .zip(plans)
        .map(|(pl, plan)| match plan {
            Some(plan) => restore_plane(pl, plan),
            None => Ok(pl.clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    rebuild(f, planes)
}

/// Runs the in-loop stages `fh` enables on the pre-filter reconstruction.
pub(crate) fn apply_in_loop(mut f: Frame, grids: &[TxGrid], fh: &FrameHeader) -> Result<Frame> {
    let stages = fh.stages();
    if !is_ordered(&stages) {
        return Err(Error::Malformed("in-loop stages out of order".into()));
    }
    for s in stages {
        f = match s {
            Stage::Deblock => {
                deblock_frame(&mut f, grids, &fh.deblock);
                f
            }
            Stage::Cdef => cdef_frame(&f, fh.cdef.as_ref().expect("stage implies parameters"))?,
            Stage::Superres => superres_frame(&f, fh.superres.expect("stage implies parameters"))?,
            Stage::Restoration => restore_frame(&f, &fh.restoration)?,
        };
    }
    Ok(f)
}

/// Per-plane thresholds minimizing squared error against `src`. Candidate
/// activity limits are fractions of the quantizer step.
pub(crate) fn choose_deblock(f: &Frame, src: &Frame, grids: &[TxGrid], base_qp: u8) -> Vec<DeblockParams> {
    let step = sample_step(base_qp, f.bit_depth());
    let mut limits: Vec<u32> = [16, 8, 4, 2, 1].iter().map(|d| (step / d).max(1)).collect();
    limits.dedup();
    f.planes()
        .into_iter()
        .zip(src.planes())
        .enumerate()
        .map(|(i, (pl, s))| {
            let mut best = (plane_sse(pl, s), DeblockParams::OFF);
            for &t0 in &limits {
                let params = DeblockParams::new(t0, 3 * t0);
                let mut trial = pl.clone();
                deblock_plane(&mut trial, &grids[i], params, params, plane_kind(i));
                let e = plane_sse(&trial, s);
                if e < best.0 {
                    best = (e, params);
                }
            }
            best.1
        })
        .collect()
}

/// Primary and secondary strength presets at 8 bits.
const CDEF_PRESETS: [(u32, u32); 8] = [(0, 0), (1, 0), (2, 1), (3, 1), (4, 2), (6, 2), (8, 2), (12, 4)];

/// Frame-wide strengths minimizing squared error against `src`, or `None`
/// when no preset helps.
pub(crate) fn choose_cdef(f: &Frame, src: &Frame) -> Result<Option<CdefParams>> {
    let scale = 1 << (f.bit_depth() - 8);
    let damping = 4 + (f.bit_depth() - 8) / 2;
    let err = |planes: &[usize], st: CdefStrength| -> u64 {
        planes
            .iter()
            .map(|&i| {
                let (pl, s) = (f.plane(i).expect("plane exists"), src.plane(i).expect("plane exists"));
                if st == CdefStrength::default() {
                    plane_sse(pl, s)
                } else {
                    plane_sse(&cdef_plane(pl, damping, |_, _| st).0, s)
                }
            })
            .sum()
    };
    // Luma has its own strength; both chroma planes share one.
    let groups = [vec![0], (1..f.planes().len()).collect::<Vec<_>>()];
    let mut chosen = [CdefStrength::default(); 2];
    for (g, planes) in groups.iter().enumerate() {
        if planes.is_empty() {
            continue;
        }
        let mut best = (err(planes, CdefStrength::default()), CdefStrength::default());
        for &(p, q) in &CDEF_PRESETS[1..] {
            let st = CdefStrength { primary: p * scale, secondary: q * scale };
            let e = err(planes, st);
            if e < best.0 {
                best = (e, st);
            }
        }
        chosen[g] = best.1;
    }
    if chosen.iter().all(|s| *s == CdefStrength::default()) {
        return Ok(None);
    }
    CdefParams::uniform(chosen[0], chosen[1], damping).map(Some)
}

/// Restoration unit side used by the harness.
pub(crate) const RESTORATION_UNIT: usize = 64;

const WIENER_PRESETS: [[i32; 3]; 3] = [[3, -7, 15], [0, 0, 16], [-1, 4, 24]];

fn sgr_presets(base_qp: u8, bit_depth: u32) -> Vec<SgrParams> {
    // Noise variance of a uniform quantizer is step^2 / 12.
    let step = sample_step(base_qp, bit_depth) as u64;
    let var = (step * step / 12).max(1) as u32;
    let fixed = 50 << (2 * (bit_depth - 8));
    vec![
        SgrParams { r1: 2, e1: var, r2: 1, e2: (var / 2).max(1) },
        SgrParams { r1: 2, e1: 4 * var, r2: 1, e2: 2 * var },
        SgrParams { r1: 2, e1: fixed, r2: 1, e2: (fixed * 2 / 5).max(1) },
    ]
}

/// Per-unit filters minimizing squared error against `src`.
pub(crate) fn choose_restoration(f: &Frame, src: &Frame, base_qp: u8) -> Result<Vec<Option<RestorationPlan>>> {
    let sgr = sgr_presets(base_qp, f.bit_depth());
    let wiener: Vec<WienerTaps> = WIENER_PRESETS.iter().map(|&t| WienerTaps::new(t)).collect::<Result<_>>()?;
    let mut plans = Vec::new();
    for (pl, s) in f.planes().into_iter().zip(src.planes()) {
        let mut plan = RestorationPlan::new(pl.width, pl.height, RESTORATION_UNIT)?;
        let mut any = false;
        for row in 0..plan.rows {
            for col in 0..plan.cols {
                let rect = plan.rect(col, row);
                let target = s.block(rect.0 as isize, rect.1 as isize, rect.2, rect.3);
                let err = |m: RestorationMode| -> Result<i64> { Ok(squared_error(&restore_unit(pl, rect, m)?, &target)) };
                let mut best = (err(RestorationMode::Bypass)?, RestorationMode::Bypass);
                let mut candidates: Vec<RestorationMode> = wiener.iter().map(|&t| RestorationMode::Wiener { v: t, h: t }).collect();
                for &p in &sgr {
                    candidates.push(choose_self_guided(pl, s, rect, p)?);
                }
                for m in candidates {
                    if m == RestorationMode::Bypass {
                        continue;
                    }
                    let e = err(m)?;
                    if e < best.0 {
                        best = (e, m);
                    }
                }
                any |= best.1 != RestorationMode::Bypass;
                plan.set(col, row, best.1);
            }
        }
        plans.push(any.then_some(plan));
    }
    Ok(plans)
}
