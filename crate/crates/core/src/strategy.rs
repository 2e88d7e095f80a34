//! Metered strategies: interpreted programs or host-implemented builtins that
//! account for their time through the same cost model.

use std::fmt;
use std::sync::Arc;

use crate::vm::{
    execute_with, BitSource, Bits, CapExceeded, ExecutionInput, ExecutionOutcome, Meter, Program,
};

/// Anything that can be played as a machine in the metagame.
pub trait Strategy: Send + Sync {
    fn name(&self) -> String;

    /// Description size in bits.
    fn size_bits(&self) -> u64;

    fn run(&self, input: &ExecutionInput, rng: &mut BitSource, step_cap: u64) -> ExecutionOutcome;
}

impl Strategy for Program {
    fn name(&self) -> String {
        Program::name(self).to_string()
    }

    fn size_bits(&self) -> u64 {
        Program::size_bits(self)
    }

    fn run(&self, input: &ExecutionInput, rng: &mut BitSource, step_cap: u64) -> ExecutionOutcome {
        execute_with(self, input, rng, step_cap)
    }
}

/// Shared handle to a strategy.
#[derive(Clone)]
pub struct MeteredStrategy(Arc<dyn Strategy>);

impl MeteredStrategy {
    pub fn new(s: impl Strategy + 'static) -> Self {
        MeteredStrategy(Arc::new(s))
    }

    pub fn program(p: Program) -> Self {
        MeteredStrategy::new(p)
    }

    pub fn name(&self) -> String {
        self.0.name()
    }

    pub fn size_bits(&self) -> u64 {
        self.0.size_bits()
    }

    /// One computation path, with random bits derived from `seed`.
    pub fn execute(&self, input: &ExecutionInput, seed: u64, step_cap: u64) -> ExecutionOutcome {
        assert!(step_cap >= 1, "step cap must be positive");
        self.0.run(input, &mut BitSource::seeded(seed), step_cap)
    }

    pub fn execute_with(&self, input: &ExecutionInput, rng: &mut BitSource, step_cap: u64) -> ExecutionOutcome {
        self.0.run(input, rng, step_cap)
    }
}

impl fmt::Debug for MeteredStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("MeteredStrategy").field(&self.name()).finish()
    }
}

/// Bookkeeping for builtins: a meter plus the output tape.
#[derive(Debug)]
pub struct HostRun {
    meter: Meter,
    out: Bits,
}

impl HostRun {
    pub fn new(step_cap: u64) -> Self {
        HostRun { meter: Meter::new(step_cap), out: Bits::new() }
    }

    pub fn charge(&mut self, cost: u64) -> Result<(), CapExceeded> {
        self.meter.charge(cost)
    }

    pub fn can_afford(&self, cost: u64) -> bool {
        self.meter.can_afford(cost)
    }

    pub fn used(&self) -> u64 {
        self.meter.used()
    }

    pub fn out_mut(&mut self) -> &mut Bits {
        &mut self.out
    }

    pub fn finish(self) -> ExecutionOutcome {
        ExecutionOutcome::halted(self.out, self.meter.used())
    }

    pub fn capped(self) -> ExecutionOutcome {
        ExecutionOutcome::capped(self.meter.cap())
    }
}

/// Runs a builtin body; a [`CapExceeded`] anywhere turns into a non-halting
/// outcome at the cap.
pub fn host_execute(
    step_cap: u64,
    body: impl FnOnce(&mut HostRun) -> Result<(), CapExceeded>,
) -> ExecutionOutcome {
    let mut run = HostRun::new(step_cap);
    match body(&mut run) {
        Ok(()) => run.finish(),
        Err(CapExceeded) => run.capped(),
    }
}
