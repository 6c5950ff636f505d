//! Persistent binary heap trees.
//!
//! A [`Tree`] is either empty or a reference-counted node carrying its left
//! subtree, key, right subtree and cached `size` and `rank`. Trees are never
//! mutated after construction, so subtrees are shared freely between the
//! inputs and outputs of a meld.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::ParseError;

/// A key extended with a top element that is greater than every key.
///
/// The derived order puts every `Key` below `Top`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedKey<K> {
    Key(K),
    Top,
}

impl<K> ExtendedKey<K> {
    pub fn key(self) -> Option<K> {
        match self {
            ExtendedKey::Key(k) => Some(k),
            ExtendedKey::Top => None,
        }
    }
}

pub struct Node<K> {
    left: Tree<K>,
    key: K,
    right: Tree<K>,
    size: u64,
    rank: u32,
}

impl<K> Node<K> {
    pub fn left(&self) -> &Tree<K> {
        &self.left
    }

    pub fn key(&self) -> &K {
        &self.key
    }

    pub fn right(&self) -> &Tree<K> {
        &self.right
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }
}

// Right spines of skew heaps can be as long as the heap, so dropping must
// not recurse.
impl<K> Drop for Node<K> {
    fn drop(&mut self) {
        let mut pending = Vec::new();
        pending.push(std::mem::take(&mut self.left));
        pending.push(std::mem::take(&mut self.right));
        while let Some(tree) = pending.pop() {
            if let Some(arc) = tree.0 {
                if let Ok(mut node) = Arc::try_unwrap(arc) {
                    pending.push(std::mem::take(&mut node.left));
                    pending.push(std::mem::take(&mut node.right));
                }
            }
        }
    }
}

/// An immutable heap-ordered binary tree: `()` or `(left key right)`.
pub struct Tree<K>(Option<Arc<Node<K>>>);

impl<K> Default for Tree<K> {
    fn default() -> Self {
        Tree(None)
    }
}

impl<K> Clone for Tree<K> {
    fn clone(&self) -> Self {
        Tree(self.0.clone())
    }
}

impl<K> Tree<K> {
    pub fn empty() -> Self {
        Tree(None)
    }

    pub fn single(key: K) -> Self {
        Self::node(Tree::empty(), key, Tree::empty())
    }

    /// Builds `(left key right)` with fresh caches. No ordering or leftist
    /// condition is checked; see [`crate::validate`].
    pub fn node(left: Tree<K>, key: K, right: Tree<K>) -> Self {
        let size = left.size() + right.size() + 1;
        let rank = right.rank() + 1;
        Tree(Some(Arc::new(Node {
            left,
            key,
            right,
            size,
            rank,
        })))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn root(&self) -> Option<&Node<K>> {
        self.0.as_deref()
    }

    pub fn left(&self) -> Option<&Tree<K>> {
        self.root().map(Node::left)
    }

    pub fn right(&self) -> Option<&Tree<K>> {
        self.root().map(Node::right)
    }

    /// Number of nodes.
    pub fn size(&self) -> u64 {
        self.root().map_or(0, |n| n.size)
    }

    /// `size + 1`, the argument of every logarithmic bound.
    pub fn sz(&self) -> u64 {
        self.size() + 1
    }

    /// Length of the rightmost path.
    pub fn rank(&self) -> u32 {
        self.root().map_or(0, |n| n.rank)
    }

    /// Root key, or `Top` for the empty tree.
    pub fn min(&self) -> ExtendedKey<&K> {
        match self.root() {
            Some(n) => ExtendedKey::Key(&n.key),
            None => ExtendedKey::Top,
        }
    }

    /// Pointer identity; two empty trees are identical.
    pub fn ptr_eq(&self, other: &Tree<K>) -> bool {
        match (&self.0, &other.0) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    /// Address of the root node, used to detect shared subtrees.
    pub(crate) fn addr(&self) -> Option<usize> {
        self.0.as_ref().map(|a| Arc::as_ptr(a) as usize)
    }

    pub(crate) fn is_shared(&self) -> bool {
        self.0.as_ref().is_some_and(|a| Arc::strong_count(a) > 1)
    }

    /// Keys in preorder.
    pub fn keys(&self) -> Vec<&K> {
        let mut out = Vec::with_capacity(self.size() as usize);
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if let Some(n) = t.root() {
                out.push(&n.key);
                stack.push(&n.right);
                stack.push(&n.left);
            }
        }
        out
    }

    /// Same shape with every key replaced by `f(key)`.
    pub fn map_keys<J>(&self, mut f: impl FnMut(&K) -> J) -> Tree<J> {
        enum Step<'a, K> {
            Enter(&'a Tree<K>),
            Build(&'a K),
        }
        let mut steps = vec![Step::Enter(self)];
        let mut built: Vec<Tree<J>> = Vec::new();
        while let Some(step) = steps.pop() {
            match step {
                Step::Enter(t) => match t.root() {
                    None => built.push(Tree::empty()),
                    Some(n) => {
                        steps.push(Step::Build(&n.key));
                        steps.push(Step::Enter(&n.right));
                        steps.push(Step::Enter(&n.left));
                    }
                },
                Step::Build(k) => {
                    let right = built.pop().expect("right subtree built");
                    let left = built.pop().expect("left subtree built");
                    built.push(Tree::node(left, f(k), right));
                }
            }
        }
        built.pop().expect("root built")
    }
}

impl<K: PartialEq> PartialEq for Tree<K> {
    /// Structural equality: same shape and same keys, node for node.
    fn eq(&self, other: &Self) -> bool {
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            if a.ptr_eq(b) {
                continue;
            }
            match (a.root(), b.root()) {
                (Some(x), Some(y)) => {
                    if x.size != y.size || x.key != y.key {
                        return false;
                    }
                    stack.push((&x.left, &y.left));
                    stack.push((&x.right, &y.right));
                }
                _ => return false,
            }
        }
        true
    }
}

impl<K: Eq> Eq for Tree<K> {}

impl<K> Tree<K> {
    fn write_with(
        &self,
        f: &mut fmt::Formatter<'_>,
        key: impl Fn(&K, &mut fmt::Formatter<'_>) -> fmt::Result,
    ) -> fmt::Result {
        enum Step<'a, K> {
            Tree(&'a Tree<K>),
            Key(&'a K),
            Close,
        }
        let mut stack = vec![Step::Tree(self)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Tree(t) => match t.root() {
                    None => f.write_str("()")?,
                    Some(n) => {
                        f.write_str("(")?;
                        stack.push(Step::Close);
                        stack.push(Step::Tree(&n.right));
                        stack.push(Step::Key(&n.key));
                        stack.push(Step::Tree(&n.left));
                    }
                },
                Step::Key(k) => {
                    f.write_str(" ")?;
                    key(k, f)?;
                    f.write_str(" ")?;
                }
                Step::Close => f.write_str(")")?,
            }
        }
        Ok(())
    }
}

/// Canonical text form: `()` or `(L k R)` with single spaces.
impl<K: fmt::Display> fmt::Display for Tree<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, |k, f| write!(f, "{k}"))
    }
}

impl<K: fmt::Debug> fmt::Debug for Tree<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, |k, f| write!(f, "{k:?}"))
    }
}

struct Partial<K> {
    left: Option<Tree<K>>,
    key: Option<K>,
    right: Option<Tree<K>>,
}

impl<K> Default for Partial<K> {
    fn default() -> Self {
        Partial { left: None, key: None, right: None }
    }
}

impl<K: FromStr> FromStr for Tree<K> {
    type Err = ParseError;

    /// Parses `()` and `(L k R)`; whitespace between tokens is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |offset: usize, message: &str| ParseError {
            offset,
            message: message.to_string(),
        };
        let bytes = s.as_bytes();
        let mut open: Vec<Partial<K>> = Vec::new();
        let mut done: Option<Tree<K>> = None;
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if done.is_some() {
                return Err(err(i, "trailing input after tree"));
            }
            match c {
                b'(' => {
                    open.push(Partial::default());
                    i += 1;
                }
                b')' => {
                    let p = open.pop().ok_or_else(|| err(i, "unbalanced ')'"))?;
                    let tree = match (p.left, p.key, p.right) {
                        (None, None, None) => Tree::empty(),
                        (Some(l), Some(k), Some(r)) => Tree::node(l, k, r),
                        _ => return Err(err(i, "incomplete node")),
                    };
                    i += 1;
                    match open.last_mut() {
                        None => done = Some(tree),
                        Some(parent) => {
                            if parent.left.is_none() && parent.key.is_none() {
                                parent.left = Some(tree);
                            } else if parent.key.is_some() && parent.right.is_none() {
                                parent.right = Some(tree);
                            } else {
                                return Err(err(i - 1, "unexpected subtree"));
                            }
                        }
                    }
                }
                _ => {
                    let start = i;
                    while i < bytes.len()
                        && !bytes[i].is_ascii_whitespace()
                        && bytes[i] != b'('
                        && bytes[i] != b')'
                    {
                        i += 1;
                    }
                    let parent = open
                        .last_mut()
                        .ok_or_else(|| err(start, "key outside a node"))?;
                    if parent.left.is_none() || parent.key.is_some() {
                        return Err(err(start, "key must follow a left subtree"));
                    }
                    let key = s[start..i]
                        .parse()
                        .map_err(|_| err(start, "invalid key"))?;
                    parent.key = Some(key);
                }
            }
        }
        if !open.is_empty() {
            return Err(err(bytes.len(), "unclosed '('"));
        }
        done.ok_or_else(|| err(0, "no tree"))
    }
}
