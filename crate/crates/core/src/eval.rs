use num_bigint::BigUint;
use rayon::prelude::*;
use std::sync::Arc;

use crate::bigmul::Multiplier;
use crate::error::{Error, Result};
use crate::meter::{GateKind, OpCounter};
use crate::she::{add_ledger, mul_ledger, Ciphertext, ParamProfile, PublicKey};

/// Server-side gate evaluator: counts operations, optionally records the gate
/// trace, and optionally reduces values by the public `x0`.
///
/// In ledger-only mode no integer arithmetic happens; ciphertexts are
/// value-less shadows carrying only their noise bound.
#[derive(Clone, Debug)]
pub struct Evaluator {
    profile: ParamProfile,
    ops: OpCounter,
    trace: Option<Vec<GateKind>>,
    x0: Option<Arc<BigUint>>,
    mul: Multiplier,
    ledger_only: bool,
    parallel: bool,
    peak_noise: u32,
}

impl Evaluator {
    pub fn new(profile: ParamProfile) -> Self {
        Self {
            profile,
            ops: OpCounter::default(),
            trace: None,
            x0: None,
            mul: Multiplier::default(),
            ledger_only: false,
            parallel: false,
            peak_noise: 0,
        }
    }

    /// Evaluator that reduces by the key's `x0` when published.
    pub fn for_key(pk: &PublicKey) -> Self {
        let mut ev = Self::new(*pk.profile());
        ev.x0 = pk.x0().cloned().map(Arc::new);
        ev
    }

    pub fn ledger_only(profile: ParamProfile) -> Self {
        let mut ev = Self::new(profile);
        ev.ledger_only = true;
        ev
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    /// Run independent per-item work on the rayon pool.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    /// Ledger-only copy used to predict overflow before a real run.
    pub fn ledger_twin(&self) -> Self {
        Self::ledger_only(self.profile)
    }

    pub fn with_multiplier(mut self, mul: Multiplier) -> Self {
        self.mul = mul;
        self
    }

    pub fn profile(&self) -> &ParamProfile {
        &self.profile
    }

    pub fn ops(&self) -> OpCounter {
        self.ops
    }

    pub fn trace(&self) -> Option<&[GateKind]> {
        self.trace.as_deref()
    }

    pub fn is_ledger_only(&self) -> bool {
        self.ledger_only
    }

    /// Largest ledger value produced so far.
    pub fn peak_noise(&self) -> u32 {
        self.peak_noise
    }

    pub fn reset_counters(&mut self) {
        self.ops = OpCounter::default();
        if let Some(t) = self.trace.as_mut() {
            t.clear();
        }
        self.peak_noise = 0;
    }

    /// Empty worker sharing this evaluator's configuration.
    pub fn fork(&self) -> Self {
        Self {
            profile: self.profile,
            ops: OpCounter::default(),
            trace: self.trace.as_ref().map(|_| Vec::new()),
            x0: self.x0.clone(),
            mul: self.mul,
            ledger_only: self.ledger_only,
            parallel: false,
            peak_noise: 0,
        }
    }

    /// Applies `f` to every item, in parallel when enabled. Worker tallies are
    /// absorbed in item order, so counts and traces match a serial run.
    pub fn map_items<T, R, F>(&mut self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&mut Evaluator, usize, &T) -> Result<R> + Sync,
    {
        if !self.parallel || items.len() < 2 {
            return items.iter().enumerate().map(|(i, t)| f(self, i, t)).collect();
        }
        let template = self.fork();
        let results: Vec<(Result<R>, Evaluator)> = items
            .par_iter()
            .enumerate()
            .map(|(i, t)| {
                let mut w = template.fork();
                let r = f(&mut w, i, t);
                (r, w)
            })
            .collect();
        let mut out = Vec::with_capacity(results.len());
        for (r, w) in results {
            self.absorb(w);
            out.push(r?);
        }
        Ok(out)
    }

    /// Folds a worker's tallies back in. Absorbing in a fixed order keeps traces deterministic.
    pub fn absorb(&mut self, other: Evaluator) {
        self.ops += other.ops;
        if let (Some(t), Some(o)) = (self.trace.as_mut(), other.trace) {
            t.extend(o);
        }
        self.peak_noise = self.peak_noise.max(other.peak_noise);
    }

    fn record(&mut self, kind: GateKind) {
        match kind {
            GateKind::Add => self.ops.adds += 1,
            GateKind::Mul => self.ops.muls += 1,
            GateKind::MixedAdd => self.ops.mixed_adds += 1,
            GateKind::MixedMul => self.ops.mixed_muls += 1,
            GateKind::Star => {
                self.ops.adds += 3;
                self.ops.muls += 3;
            }
        }
        if let Some(t) = self.trace.as_mut() {
            t.push(kind);
        }
    }

    fn check(&self, c: &Ciphertext) -> Result<()> {
        if *c.profile() == self.profile {
            Ok(())
        } else {
            Err(Error::ProfileMismatch)
        }
    }

    fn emit(&mut self, value: BigUint, noise: u32) -> Ciphertext {
        self.peak_noise = self.peak_noise.max(noise);
        let value = match (&self.x0, self.ledger_only) {
            (_, true) => BigUint::default(),
            (Some(x0), false) if value >= **x0 => value % &**x0,
            _ => value,
        };
        Ciphertext::shadow(self.profile, noise).with_value(value)
    }

    pub fn add(&mut self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check(a)?;
        self.check(b)?;
        self.record(GateKind::Add);
        let noise = add_ledger(a.noise_bits(), b.noise_bits());
        let v = if self.ledger_only {
            BigUint::default()
        } else {
            a.value() + b.value()
        };
        Ok(self.emit(v, noise))
    }

    pub fn mul(&mut self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check(a)?;
        self.check(b)?;
        self.record(GateKind::Mul);
        let noise = mul_ledger(a.noise_bits(), b.noise_bits());
        let v = if self.ledger_only {
            BigUint::default()
        } else {
            self.mul.mul(a.value(), b.value())
        };
        Ok(self.emit(v, noise))
    }

    pub fn mixed_add(&mut self, p: bool, c: &Ciphertext) -> Result<Ciphertext> {
        self.check(c)?;
        self.record(GateKind::MixedAdd);
        if !p {
            return Ok(c.clone().without_hint());
        }
        let v = if self.ledger_only {
            BigUint::default()
        } else {
            c.value() + 1u32
        };
        Ok(self.emit(v, add_ledger(c.noise_bits(), 1)))
    }

    pub fn mixed_mul(&mut self, p: bool, c: &Ciphertext) -> Result<Ciphertext> {
        self.check(c)?;
        self.record(GateKind::MixedMul);
        if p {
            Ok(c.clone().without_hint())
        } else {
            Ok(Ciphertext::literal_zero(self.profile))
        }
    }

    /// NOT gate: `1 ⊕ c`.
    pub fn not(&mut self, c: &Ciphertext) -> Result<Ciphertext> {
        self.mixed_add(true, c)
    }

    /// `f(S,X,Y) = S·X·Y ⊕ (1 ⊕ S)·(X ⊕ Y)`: AND when `S = 1`, XOR when `S = 0`.
    ///
    /// Evaluated as `S·(X·Y) + (X + Y) + S·(X + Y)`. The residue is below
    /// `2^(n_s + n_x + n_y + 2)`, so the ledger is set to `n_s + n_x + n_y + 3`.
    pub fn star(&mut self, s: &Ciphertext, x: &Ciphertext, y: &Ciphertext) -> Result<Ciphertext> {
        self.check(s)?;
        self.check(x)?;
        self.check(y)?;
        self.record(GateKind::Star);
        let noise = s
            .noise_bits()
            .saturating_add(x.noise_bits())
            .saturating_add(y.noise_bits())
            .saturating_add(3);
        let v = if self.ledger_only {
            BigUint::default()
        } else {
            let xy = self.mul.mul(x.value(), y.value());
            let sum = x.value() + y.value();
            let sxy = self.mul.mul(s.value(), &xy);
            let s_sum = self.mul.mul(s.value(), &sum);
            sxy + sum + s_sum
        };
        Ok(self.emit(v, noise))
    }
}
