//! Fully unrolled decoder hardware model.
//!
//! A pruned decoder tree is unrolled into a dataflow graph of blocks, the
//! blocks are placed into clock cycles, and a register is allocated at every
//! cycle boundary a signal has to cross. Partial pipelining keeps only every
//! `ii`-th register of a chain, which forces frames to be injected `ii`
//! cycles apart.

mod sim;

use serde::{Deserialize, Serialize};

use crate::code::{DecoderTree, NodeKind};
use crate::error::{param, Result};

pub use sim::{simulate, SimulationRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    ChannelIn,
    F,
    G,
    #[serde(rename = "g0r")]
    G0R,
    I,
    C,
    #[serde(rename = "c0r")]
    C0R,
    Out,
}

impl BlockKind {
    /// Blocks that contain logic, as opposed to wiring and I/O.
    pub fn is_logic(self) -> bool {
        !matches!(self, BlockKind::ChannelIn | BlockKind::Out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Payload {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signal {
    pub id: usize,
    pub payload: Payload,
    pub width: usize,
    /// `None` for the constant all-zero estimate of a rate-0 subtree.
    pub producer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub id: usize,
    pub kind: BlockKind,
    /// Messages or bits produced in parallel.
    pub width: usize,
    /// Heap id of the tree node the block belongs to.
    pub node: usize,
    pub inputs: Vec<usize>,
    pub output: usize,
}

/// Unrolled decoder. Blocks are stored in a topological order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Dataflow {
    pub n_bits: usize,
    pub blocks: Vec<Block>,
    pub signals: Vec<Signal>,
    /// Root estimate, `None` when the whole code is frozen.
    pub output: Option<usize>,
}

/// Estimate of a subtree before it is turned into a signal. Chains of
/// zero-left combines collapse into one replication.
enum Beta {
    Zero(usize),
    Sig(usize),
    Rep { src: usize, width: usize },
}

impl Dataflow {
    fn signal(&mut self, payload: Payload, width: usize, producer: Option<usize>) -> usize {
        let id = self.signals.len();
        self.signals.push(Signal {
            id,
            payload,
            width,
            producer,
        });
        id
    }

    fn block(
        &mut self,
        kind: BlockKind,
        width: usize,
        node: usize,
        inputs: Vec<usize>,
        payload: Payload,
    ) -> usize {
        let id = self.blocks.len();
        let output = self.signal(payload, width, Some(id));
        self.blocks.push(Block {
            id,
            kind,
            width,
            node,
            inputs,
            output,
        });
        output
    }

    fn materialize(&mut self, beta: Beta, node: usize) -> usize {
        match beta {
            Beta::Sig(s) => s,
            Beta::Zero(width) => self.signal(Payload::Beta, width, None),
            Beta::Rep { src, width } => {
                self.block(BlockKind::C0R, width, node, vec![src], Payload::Beta)
            }
        }
    }

    fn unroll_node(&mut self, tree: &DecoderTree, idx: usize, alpha: usize) -> Beta {
        let node = tree.node(idx);
        let (len, id) = (node.len, node.heap_id);
        match node.kind {
            NodeKind::Rate0 => Beta::Zero(len),
            NodeKind::Rate1 => {
                Beta::Sig(self.block(BlockKind::I, len, id, vec![alpha], Payload::Beta))
            }
            NodeKind::Internal { left, right } => {
                let h = len / 2;
                let right_zero = tree.node(right).kind == NodeKind::Rate0;
                if tree.node(left).kind == NodeKind::Rate0 {
                    let ar = self.block(BlockKind::G0R, h, id, vec![alpha], Payload::Alpha);
                    return match self.unroll_node(tree, right, ar) {
                        Beta::Sig(src) => Beta::Rep { src, width: len },
                        Beta::Rep { src, .. } => Beta::Rep { src, width: len },
                        Beta::Zero(_) => Beta::Zero(len),
                    };
                }
                let al = self.block(BlockKind::F, h, id, vec![alpha], Payload::Alpha);
                let bl = self.unroll_node(tree, left, al);
                let bl = self.materialize(bl, 2 * id);
                let br = if right_zero {
                    Beta::Zero(h)
                } else {
                    let ar = self.block(BlockKind::G, h, id, vec![alpha, bl], Payload::Alpha);
                    self.unroll_node(tree, right, ar)
                };
                let br = self.materialize(br, 2 * id + 1);
                Beta::Sig(self.block(BlockKind::C, len, id, vec![bl, br], Payload::Beta))
            }
        }
    }

    /// Number of logic blocks of each kind.
    pub fn block_counts(&self) -> std::collections::BTreeMap<BlockKind, usize> {
        let mut m = std::collections::BTreeMap::new();
        for b in self.blocks.iter().filter(|b| b.kind.is_logic()) {
            *m.entry(b.kind).or_insert(0) += 1;
        }
        m
    }

    fn consumers(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.signals.len()];
        for b in &self.blocks {
            for &s in &b.inputs {
                c[s].push(b.id);
            }
        }
        c
    }
}

/// Instantiates every operation of the pruned tree as a block.
pub fn unroll(tree: &DecoderTree) -> Dataflow {
    let root = tree.root();
    let mut g = Dataflow {
        n_bits: root.len,
        ..Default::default()
    };
    if root.kind == NodeKind::Rate0 {
        return g;
    }
    let alpha_c = g.block(
        BlockKind::ChannelIn,
        root.len,
        0,
        Vec::new(),
        Payload::Alpha,
    );
    let beta = g.unroll_node(tree, tree.root_index(), alpha_c);
    let out = g.materialize(beta, root.heap_id);
    g.block(BlockKind::Out, root.len, 0, vec![out], Payload::Beta);
    g.output = Some(out);
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineMode {
    Deep,
    Partial(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Register {
    pub signal: usize,
    pub payload: Payload,
    pub width: usize,
    /// Cycle boundary after which the register latches.
    pub column: usize,
    /// Removed by partial pipelining.
    pub dotted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineSchedule {
    pub mode: PipelineMode,
    pub graph: Dataflow,
    /// Clock cycle of every block.
    pub cycles: Vec<usize>,
    /// First cycle in which each signal is valid on its wire.
    pub ready: Vec<usize>,
    pub registers: Vec<Register>,
    pub latency_cc: usize,
    pub initiation_interval: usize,
}

impl PipelineSchedule {
    pub fn kept_registers(&self) -> impl Iterator<Item = &Register> {
        self.registers.iter().filter(|r| !r.dotted)
    }

    /// Register bits with `message_bits`-wide α messages and 1-bit β.
    pub fn register_bits(&self, message_bits: usize) -> usize {
        self.kept_registers()
            .map(|r| match r.payload {
                Payload::Alpha => r.width * message_bits,
                Payload::Beta => r.width,
            })
            .sum()
    }

    /// Cycle in which `block` samples its inputs. The output stage samples
    /// the register behind the last logic cycle.
    pub(crate) fn read_cycle(&self, block: usize) -> usize {
        match self.graph.blocks[block].kind {
            BlockKind::Out => self.cycles[block] + 1,
            _ => self.cycles[block],
        }
    }
}

/// Places blocks into clock cycles and allocates registers.
///
/// The channel is captured in cycle 1. `F`, `G`, `G0R` and `C` take one
/// cycle each and start as soon as all inputs sit in registers. `I` adds no
/// cycle: it joins its producer's cycle, or the first cycle after capture
/// when fed straight from the channel. `C0R` is wiring and is usable in the
/// cycle its input is registered.
pub fn schedule(graph: &Dataflow, mode: PipelineMode) -> Result<PipelineSchedule> {
    let ii = match mode {
        PipelineMode::Deep => 1,
        PipelineMode::Partial(ii) if ii >= 1 => ii,
        PipelineMode::Partial(ii) => {
            return param(format!("initiation interval {ii} must be at least 1"))
        }
    };
    let mut cycles = vec![0; graph.blocks.len()];
    let mut ready = vec![0; graph.signals.len()];
    let mut avail = vec![0; graph.signals.len()];
    for b in &graph.blocks {
        let inputs_avail = b.inputs.iter().map(|&s| avail[s]).max().unwrap_or(0);
        let (cycle, out_avail) = match b.kind {
            BlockKind::ChannelIn => (1, 2),
            BlockKind::F | BlockKind::G | BlockKind::G0R | BlockKind::C => {
                let c = inputs_avail.max(1);
                (c, c + 1)
            }
            BlockKind::I => {
                let src = b.inputs[0];
                let from_channel = graph.signals[src]
                    .producer
                    .is_some_and(|p| graph.blocks[p].kind == BlockKind::ChannelIn);
                let c = if from_channel { avail[src] } else { ready[src] };
                (c, c + 1)
            }
            BlockKind::C0R => (inputs_avail, inputs_avail),
            BlockKind::Out => {
                let c = ready[b.inputs[0]];
                (c, c)
            }
        };
        cycles[b.id] = cycle;
        ready[b.output] = cycle;
        avail[b.output] = out_avail;
    }
    let latency_cc = graph.output.map_or(0, |s| ready[s]);

    let mut sched = PipelineSchedule {
        mode,
        graph: graph.clone(),
        cycles,
        ready,
        registers: Vec::new(),
        latency_cc,
        initiation_interval: ii,
    };
    let consumers = graph.consumers();
    let mut registers = Vec::new();
    for s in &graph.signals {
        if s.producer.is_none() || consumers[s.id].is_empty() {
            continue;
        }
        let rc = sched.ready[s.id];
        let last = consumers[s.id]
            .iter()
            .map(|&b| sched.read_cycle(b))
            .max()
            .unwrap_or(0);
        for column in rc..last {
            registers.push(Register {
                signal: s.id,
                payload: s.payload,
                width: s.width,
                column,
                dotted: !(column - rc).is_multiple_of(ii),
            });
        }
    }
    registers.sort_by_key(|r| (r.column, r.signal));
    sched.registers = registers;
    Ok(sched)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub clock_hz: f64,
    pub latency_cc: usize,
    pub initiation_interval: usize,
    pub info_throughput_bps: f64,
    pub latency_ns: f64,
    pub message_bits: usize,
    pub register_bits: usize,
}

pub fn info_throughput_bps(k: usize, clock_hz: f64, initiation_interval: usize) -> f64 {
    k as f64 * clock_hz / initiation_interval as f64
}

pub fn latency_ns(latency_cc: usize, clock_hz: f64) -> f64 {
    latency_cc as f64 / clock_hz * 1e9
}

/// Throughput and latency of `schedule` at `clock_hz` for a code carrying
/// `k` information bits per frame, with `message_bits`-wide α registers.
pub fn throughput_report(
    schedule: &PipelineSchedule,
    clock_hz: f64,
    k: usize,
    message_bits: usize,
) -> Result<ThroughputReport> {
    if clock_hz.is_nan() || clock_hz <= 0.0 {
        return param(format!("clock frequency must be positive, got {clock_hz}"));
    }
    Ok(ThroughputReport {
        clock_hz,
        latency_cc: schedule.latency_cc,
        initiation_interval: schedule.initiation_interval,
        info_throughput_bps: info_throughput_bps(k, clock_hz, schedule.initiation_interval),
        latency_ns: latency_ns(schedule.latency_cc, clock_hz),
        message_bits,
        register_bits: schedule.register_bits(message_bits),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExportBlock {
    pub id: usize,
    pub kind: BlockKind,
    pub width: usize,
    pub node: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExportCycle {
    pub cycle: usize,
    pub blocks: Vec<ExportBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExportRegister {
    pub signal: usize,
    pub payload: Payload,
    pub column: usize,
    pub width: usize,
    pub bits: usize,
    pub dotted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExportTotals {
    pub registers: usize,
    pub dotted_registers: usize,
    pub register_bits: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScheduleExport {
    pub mode: PipelineMode,
    pub latency_cc: usize,
    pub initiation_interval: usize,
    pub message_bits: usize,
    pub cycles: Vec<ExportCycle>,
    pub registers: Vec<ExportRegister>,
    pub totals: ExportTotals,
}

/// Blocks per cycle and the register inventory, ordered by cycle then id.
pub fn export_schedule(schedule: &PipelineSchedule, message_bits: usize) -> ScheduleExport {
    let mut cycles: Vec<ExportCycle> = Vec::new();
    let mut order: Vec<usize> = (0..schedule.graph.blocks.len()).collect();
    order.sort_by_key(|&b| (schedule.cycles[b], b));
    for b in order {
        let blk = &schedule.graph.blocks[b];
        let cycle = schedule.cycles[b];
        if cycles.last().map(|c| c.cycle) != Some(cycle) {
            cycles.push(ExportCycle {
                cycle,
                blocks: Vec::new(),
            });
        }
        cycles
            .last_mut()
            .expect("just pushed")
            .blocks
            .push(ExportBlock {
                id: blk.id,
                kind: blk.kind,
                width: blk.width,
                node: blk.node,
            });
    }
    let registers: Vec<ExportRegister> = schedule
        .registers
        .iter()
        .map(|r| ExportRegister {
            signal: r.signal,
            payload: r.payload,
            column: r.column,
            width: r.width,
            bits: match r.payload {
                Payload::Alpha => r.width * message_bits,
                Payload::Beta => r.width,
            },
            dotted: r.dotted,
        })
        .collect();
    ScheduleExport {
        mode: schedule.mode,
        latency_cc: schedule.latency_cc,
        initiation_interval: schedule.initiation_interval,
        message_bits,
        totals: ExportTotals {
            registers: schedule.kept_registers().count(),
            dotted_registers: schedule.registers.len() - schedule.kept_registers().count(),
            register_bits: schedule.register_bits(message_bits),
        },
        cycles,
        registers,
    }
}
