//! Sparse map from independent-variable index to partial derivative.

/// Entries are kept sorted by variable index with unique keys, so
/// iteration is in ascending index order.
///
/// Stored as a flat sorted vector: most residual entries depend on a
/// handful of variables, and a contiguous buffer keeps evaluation of large
/// models cache friendly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DependencyMap {
    entries: Vec<(usize, f64)>,
}

/// Below this many incoming entries a merge inserts in place instead of
/// rebuilding the buffer.
const SMALL_MERGE: usize = 4;

impl DependencyMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<f64> {
        self.find(id).ok().map(|i| self.entries[i].1)
    }

    pub fn contains_key(&self, id: usize) -> bool {
        self.find(id).is_ok()
    }

    pub fn keys(&self) -> impl DoubleEndedIterator<Item = usize> + ExactSizeIterator + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn values(&self) -> impl DoubleEndedIterator<Item = f64> + ExactSizeIterator + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn iter(&self) -> std::iter::Copied<std::slice::Iter<'_, (usize, f64)>> {
        self.entries.iter().copied()
    }

    /// Largest variable index present.
    pub fn last_key(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0)
    }

    pub fn as_slice(&self) -> &[(usize, f64)] {
        &self.entries
    }

    fn find(&self, id: usize) -> Result<usize, usize> {
        self.entries.binary_search_by_key(&id, |e| e.0)
    }

    pub(crate) fn clear(&mut self) {
        self.entries.clear();
    }

    /// Sets the derivative for `id`, replacing any existing value.
    pub(crate) fn insert(&mut self, id: usize, d: f64) {
        match self.find(id) {
            Ok(i) => self.entries[i].1 = d,
            Err(i) => self.entries.insert(i, (id, d)),
        }
    }

    pub(crate) fn scale(&mut self, c: f64) {
        for e in &mut self.entries {
            e.1 *= c;
        }
    }

    /// For every `(k, d)` of `other`: `self[k] = f(self[k], d)`, where a
    /// key missing from `self` reads as 0. The result holds the union of
    /// both key sets.
    pub(crate) fn merge(&mut self, other: &DependencyMap, f: impl Fn(f64, f64) -> f64) {
        let o = &other.entries;
        let Some(&(first, _)) = o.first() else {
            return;
        };
        let s = &mut self.entries;
        if s.last().map_or(true, |e| e.0 < first) {
            s.extend(o.iter().map(|&(k, d)| (k, f(0.0, d))));
        } else if o.len() <= SMALL_MERGE {
            for &(k, d) in o {
                match s.binary_search_by_key(&k, |e| e.0) {
                    Ok(i) => s[i].1 = f(s[i].1, d),
                    Err(i) => s.insert(i, (k, f(0.0, d))),
                }
            }
        } else {
            let mut out = Vec::with_capacity(s.len() + o.len());
            let (mut a, mut b) = (s.iter().peekable(), o.iter().peekable());
            loop {
                match (a.peek(), b.peek()) {
                    (Some(&&(ka, va)), Some(&&(kb, vb))) => {
                        if ka < kb {
                            out.push((ka, va));
                            a.next();
                        } else if kb < ka {
                            out.push((kb, f(0.0, vb)));
                            b.next();
                        } else {
                            out.push((ka, f(va, vb)));
                            a.next();
                            b.next();
                        }
                    }
                    (Some(&&e), None) => {
                        out.push(e);
                        a.next();
                    }
                    (None, Some(&&(kb, vb))) => {
                        out.push((kb, f(0.0, vb)));
                        b.next();
                    }
                    (None, None) => break,
                }
            }
            *s = out;
        }
    }
}

impl<'a> IntoIterator for &'a DependencyMap {
    type Item = (usize, f64);
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, (usize, f64)>>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

impl FromIterator<(usize, f64)> for DependencyMap {
    /// Later entries win on duplicate keys.
    fn from_iter<I: IntoIterator<Item = (usize, f64)>>(iter: I) -> Self {
        let mut m = DependencyMap::new();
        for (k, d) in iter {
            m.insert(k, d);
        }
        m
    }
}
