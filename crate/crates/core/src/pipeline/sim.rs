//! Cycle-accurate execution of a scheduled decoder.

use super::{BlockKind, PipelineSchedule};
use crate::error::{param, Error, Result};
use crate::kernels::Kernel;
use crate::Bit;

#[derive(Debug, Clone)]
enum Val<M> {
    A(Vec<M>),
    B(Vec<Bit>),
}

impl<M: Copy + Default> Val<M> {
    fn alpha(&self) -> &[M] {
        match self {
            Val::A(v) => v,
            Val::B(_) => panic!("expected an alpha signal"),
        }
    }

    fn beta(&self) -> &[Bit] {
        match self {
            Val::B(v) => v,
            Val::A(_) => panic!("expected a beta signal"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Src {
    Wire(usize),
    Reg(usize),
    Zero(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationRun {
    /// Decoded codeword of every injected frame, in injection order.
    pub outputs: Vec<Vec<Bit>>,
    pub cycles: usize,
}

/// Runs `frames` through the registered datapath, injecting a new frame
/// every `period` cycles. Register columns latch only in the cycles that
/// belong to their own frame slot, so injecting faster than the schedule's
/// initiation interval corrupts frames the way the hardware would.
pub fn simulate<K: Kernel>(
    schedule: &PipelineSchedule,
    kernel: &K,
    frames: &[Vec<K::Msg>],
    period: usize,
) -> Result<SimulationRun> {
    if period == 0 {
        return param("injection period must be at least 1");
    }
    let g = &schedule.graph;
    for (j, f) in frames.iter().enumerate() {
        if f.len() != g.n_bits {
            return param(format!(
                "frame {j} has {} messages, expected {}",
                f.len(),
                g.n_bits
            ));
        }
    }
    let Some(root) = g.output else {
        return Ok(SimulationRun {
            outputs: vec![vec![0; g.n_bits]; frames.len()],
            cycles: 0,
        });
    };

    let regs: Vec<usize> = (0..schedule.registers.len())
        .filter(|&r| !schedule.registers[r].dotted)
        .collect();
    let reg_of = |signal: usize, before: usize| -> Option<usize> {
        regs.iter()
            .copied()
            .filter(|&r| {
                schedule.registers[r].signal == signal && schedule.registers[r].column < before
            })
            .max_by_key(|&r| schedule.registers[r].column)
    };
    let mut sources: Vec<Vec<Src>> = Vec::with_capacity(g.blocks.len());
    for b in &g.blocks {
        let c = schedule.read_cycle(b.id);
        let mut srcs = Vec::with_capacity(b.inputs.len());
        for &s in &b.inputs {
            let sig = &g.signals[s];
            srcs.push(if sig.producer.is_none() {
                Src::Zero(sig.width)
            } else if c == schedule.ready[s] {
                Src::Wire(s)
            } else {
                Src::Reg(reg_of(s, c).ok_or_else(|| {
                    Error::Corruption(format!(
                        "block {} reads signal {s} with no register in front",
                        b.id
                    ))
                })?)
            });
        }
        sources.push(srcs);
    }
    // Each kept register loads either its wire or the previous kept register.
    let feeds: Vec<Src> = (0..schedule.registers.len())
        .map(|r| {
            let reg = &schedule.registers[r];
            if reg.column == schedule.ready[reg.signal] {
                Src::Wire(reg.signal)
            } else {
                Src::Reg(reg_of(reg.signal, reg.column).expect("the first column is always kept"))
            }
        })
        .collect();

    let blank = |s: usize| -> Val<K::Msg> {
        let sig = &g.signals[s];
        match sig.payload {
            super::Payload::Alpha => Val::A(vec![K::Msg::default(); sig.width]),
            super::Payload::Beta => Val::B(vec![0; sig.width]),
        }
    };
    let mut wires: Vec<Val<K::Msg>> = (0..g.signals.len()).map(blank).collect();
    let mut state: Vec<Val<K::Msg>> = schedule.registers.iter().map(|r| blank(r.signal)).collect();

    let latency = schedule.latency_cc;
    let total = if frames.is_empty() {
        0
    } else {
        (frames.len() - 1) * period + latency
    };
    let mut outputs = Vec::with_capacity(frames.len());
    for t in 1..=total {
        for (b, srcs) in g.blocks.iter().zip(&sources) {
            let read = |i: usize| -> Val<K::Msg> {
                match srcs[i] {
                    Src::Wire(s) => wires[s].clone(),
                    Src::Reg(r) => state[r].clone(),
                    Src::Zero(w) => Val::B(vec![0; w]),
                }
            };
            let node = b.node;
            let out = match b.kind {
                BlockKind::ChannelIn => {
                    if (t - 1) % period == 0 && (t - 1) / period < frames.len() {
                        Val::A(frames[(t - 1) / period].clone())
                    } else {
                        continue;
                    }
                }
                BlockKind::F => {
                    let a = read(0);
                    let a = a.alpha();
                    let h = b.width;
                    Val::A((0..h).map(|i| kernel.f(node, a[i], a[i + h])).collect())
                }
                BlockKind::G | BlockKind::G0R => {
                    let a = read(0);
                    let a = a.alpha();
                    let h = b.width;
                    let bits = if b.kind == BlockKind::G {
                        read(1).beta().to_vec()
                    } else {
                        vec![0; h]
                    };
                    Val::A(
                        (0..h)
                            .map(|i| kernel.g(node, a[i], a[i + h], bits[i]))
                            .collect(),
                    )
                }
                BlockKind::I => Val::B(
                    read(0)
                        .alpha()
                        .iter()
                        .map(|&m| kernel.hard_decision(m))
                        .collect(),
                ),
                BlockKind::C => {
                    let (l, r) = (read(0), read(1));
                    let (l, r) = (l.beta(), r.beta());
                    let mut v: Vec<Bit> = l.iter().zip(r).map(|(x, y)| x ^ y).collect();
                    v.extend_from_slice(r);
                    Val::B(v)
                }
                BlockKind::C0R => {
                    let src = read(0);
                    let src = src.beta();
                    Val::B(src.iter().copied().cycle().take(b.width).collect())
                }
                BlockKind::Out => read(0),
            };
            wires[b.output] = out;
        }
        if t >= latency && (t - latency).is_multiple_of(period) {
            outputs.push(wires[root].beta().to_vec());
        }
        let mut next = state.clone();
        for &r in &regs {
            let col = schedule.registers[r].column;
            if t >= col && (t - col).is_multiple_of(period) {
                next[r] = match feeds[r] {
                    Src::Wire(s) => wires[s].clone(),
                    Src::Reg(p) => state[p].clone(),
                    Src::Zero(_) => unreachable!("zero estimates are never registered"),
                };
            }
        }
        state = next;
    }
    Ok(SimulationRun {
        outputs,
        cycles: total,
    })
}
