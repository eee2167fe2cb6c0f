use super::table::{axpy, dot};
use super::{Real, Table};
use crate::error::{Error, Result};
use crate::vocab::HuffmanTree;

/// Exact gradient of the hierarchical-softmax loss for one target word.
#[derive(Clone, Debug, PartialEq)]
pub struct HsGradient<T> {
    pub loss: T,
    pub input: Vec<T>,
    /// One entry per node on the target's path: (node row, gradient).
    pub nodes: Vec<(u32, Vec<T>)>,
}

#[inline]
fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// ln σ(z), computed without overflow for large |z|.
#[inline]
fn log_sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Sign of the branch: bit 0 is the positive side.
#[inline]
fn branch_sign<T: Real>(bit: u8) -> T {
    if bit == 0 {
        T::one()
    } else {
        -T::one()
    }
}

fn non_finite<T: Real>(target: usize, node: u32, score: T) -> Error {
    Error::NonFinite {
        context: "hierarchical softmax".into(),
        detail: format!("target word {target}, node {node}, score {score}"),
    }
}

/// P(target | input) = Π σ(s_j ⟨node_j, input⟩) along the target's path.
pub fn hs_probability<T: Real>(
    input: &[T],
    target: usize,
    tree: &HuffmanTree,
    nodes: &Table<T>,
) -> T {
    tree.code(target)
        .iter()
        .zip(tree.path(target))
        .map(|(&bit, &node)| sigmoid(branch_sign::<T>(bit) * dot(nodes.row(node as usize), input)))
        .fold(T::one(), |p, f| p * f)
}

/// Loss −Σ log σ(s_j ⟨node_j, input⟩) and its gradients with respect to the
/// input vector and every node row on the path.
pub fn hs_loss_and_grad<T: Real>(
    input: &[T],
    target: usize,
    tree: &HuffmanTree,
    nodes: &Table<T>,
) -> Result<HsGradient<T>> {
    let mut grad = HsGradient {
        loss: T::zero(),
        input: vec![T::zero(); input.len()],
        nodes: Vec::with_capacity(tree.path(target).len()),
    };
    for (&bit, &node) in tree.code(target).iter().zip(tree.path(target)) {
        let s = branch_sign::<T>(bit);
        let row = nodes.row(node as usize);
        let z = s * dot(row, input);
        if !z.is_finite() {
            return Err(non_finite(target, node, z));
        }
        grad.loss -= log_sigmoid(z);
        // d/dz [−log σ(z)] = σ(z) − 1, and dz/d(row) = s·input.
        let coeff = (sigmoid(z) - T::one()) * s;
        axpy(coeff, row, &mut grad.input);
        grad.nodes
            .push((node, input.iter().map(|&x| coeff * x).collect()));
    }
    Ok(grad)
}

/// One fused SGD step on the node rows of `target`'s path.
///
/// Node rows are updated in place; the step for the input vector is
/// accumulated into `input_delta` (computed from pre-update node values) so
/// the caller can apply it to whichever tables produced `input`. Returns the
/// loss before the update.
#[inline]
pub fn hs_update<T: Real>(
    input: &[T],
    target: usize,
    tree: &HuffmanTree,
    nodes: &mut Table<T>,
    lr: T,
    input_delta: &mut [T],
) -> Result<T> {
    let mut loss = T::zero();
    for (&bit, &node) in tree.code(target).iter().zip(tree.path(target)) {
        let s = branch_sign::<T>(bit);
        let row = nodes.row_mut(node as usize);
        let z = s * dot(row, input);
        if !z.is_finite() {
            return Err(non_finite(target, node, z));
        }
        loss -= log_sigmoid(z);
        let step = lr * (T::one() - sigmoid(z)) * s;
        axpy(step, row, input_delta);
        axpy(step, input, row);
    }
    Ok(loss)
}
