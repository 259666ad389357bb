use super::{Gradients, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Ordered collection of named trainable tensors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    entries: Vec<(String, Tensor)>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a tensor; names must be unique.
    pub fn insert(&mut self, name: &str, t: Tensor) -> Result<()> {
        if self.index_of(name).is_some() {
            return Err(Error::Usage(format!("duplicate parameter name {name}")));
        }
        self.entries.push((name.to_string(), t));
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index_of(name).map(|k| &self.entries[k].1)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index_of(name).map(move |k| &mut self.entries[k].1)
    }

    pub fn require(&self, name: &str) -> Result<&Tensor> {
        self.get(name)
            .ok_or_else(|| Error::Lookup(format!("missing parameter {name}")))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.entries.iter_mut().map(|(n, t)| (n.as_str(), t))
    }

    pub fn scalar_count(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|(_, t)| t.is_finite())
    }

    /// Record every tensor on `tape` as a gradient-requiring leaf, in order.
    pub fn bind(&self, tape: &mut Tape) -> BoundParams {
        let vars = self.entries.iter().map(|(_, t)| tape.param(t.clone())).collect();
        BoundParams {
            names: self.entries.iter().map(|(n, _)| n.clone()).collect(),
            vars,
        }
    }

    /// Zero tensors with the same names and shapes.
    pub fn zeros_like(&self) -> ParamSet {
        ParamSet {
            entries: self
                .entries
                .iter()
                .map(|(n, t)| (n.clone(), Tensor::zeros(t.shape())))
                .collect(),
        }
    }

    /// Gradients for every parameter, zero where the loss did not reach.
    pub fn gradients(&self, bound: &BoundParams, grads: &Gradients) -> ParamSet {
        ParamSet {
            entries: self
                .entries
                .iter()
                .zip(&bound.vars)
                .map(|((n, t), &v)| (n.clone(), grads.get_or_zeros(v, t.shape())))
                .collect(),
        }
    }

    /// Elementwise `self += c * other`; names and shapes must agree.
    pub fn axpy(&mut self, c: f64, other: &ParamSet) -> Result<()> {
        if self.entries.len() != other.entries.len() {
            return Err(Error::Shape("parameter sets differ in length".into()));
        }
        for ((n, t), (m, o)) in self.entries.iter_mut().zip(&other.entries) {
            if n != m || t.shape() != o.shape() {
                return Err(Error::Shape(format!("parameter {n} does not match {m}")));
            }
            t.data_mut().iter_mut().zip(o.data()).for_each(|(a, b)| *a += c * b);
        }
        Ok(())
    }

    pub fn scale(&mut self, c: f64) {
        for (_, t) in &mut self.entries {
            t.data_mut().iter_mut().for_each(|x| *x *= c);
        }
    }
}

/// Tape handles of a bound [`ParamSet`], in the same order.
#[derive(Debug, Clone)]
pub struct BoundParams {
    names: Vec<String>,
    vars: Vec<Var>,
}

impl BoundParams {
    pub fn var(&self, name: &str) -> Result<Var> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.vars[k])
            .ok_or_else(|| Error::Lookup(format!("missing parameter {name}")))
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unreached_parameters_get_zero_gradients() {
        let mut p = ParamSet::new();
        p.insert("a", Tensor::row(vec![1.0, 2.0])).unwrap();
        p.insert("b", Tensor::row(vec![3.0])).unwrap();
        assert!(p.insert("a", Tensor::row(vec![0.0])).is_err());
        let mut tape = Tape::new();
        let bound = p.bind(&mut tape);
        let s = tape.sum(bound.var("a").unwrap());
        let g = p.gradients(&bound, &tape.backward(s).unwrap());
        assert_eq!(g.get("a").unwrap().data(), &[1.0, 1.0]);
        assert_eq!(g.get("b").unwrap().data(), &[0.0]);
    }

    #[test]
    fn axpy_updates_in_place() {
        let mut p = ParamSet::new();
        p.insert("w", Tensor::row(vec![1.0, 1.0])).unwrap();
        let g = p.clone();
        p.axpy(-0.5, &g).unwrap();
        assert_eq!(p.get("w").unwrap().data(), &[0.5, 0.5]);
    }
}
