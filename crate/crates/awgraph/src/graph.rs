//! Graph input, built-in families, and distance-regularity certification.
//!
//! Everything in this module is exact: adjacency and distance matrices are
//! integer matrices, and the intersection-number table is certified by brute
//! force over all vertex pairs.  Floating point enters the pipeline only
//! after a graph has passed certification here.

use nalgebra::DMatrix;
use std::collections::BTreeSet;
use thiserror::Error;

/// Hard cap on vertex count; the pipeline is meant for desk-scale graphs and
/// dense matrix work beyond this size is not useful.
pub const MAX_VERTICES: usize = 512;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("asymmetric input: entry ({0},{1}) disagrees with ({1},{0})")]
    Asymmetric(usize, usize),
    #[error("loop detected at vertex {0}")]
    Loop(usize),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(usize, usize),
    #[error("disconnected graph: vertex {0} is unreachable from vertex 0")]
    Disconnected(usize),
    #[error("invalid size for family `{family}`: {reason}")]
    InvalidSize { family: String, reason: String },
    #[error("not regular: vertex {vertex_a} has degree {degree_a} but vertex {vertex_b} has degree {degree_b}")]
    NotRegular {
        vertex_a: usize,
        degree_a: usize,
        vertex_b: usize,
        degree_b: usize,
    },
    #[error(
        "not distance-regular: |Γ_{i}(x) ∩ Γ_{j}(y)| differs at distance {h}: \
         pair {pair_a:?} gives {count_a}, pair {pair_b:?} gives {count_b}"
    )]
    NotDistanceRegular {
        h: usize,
        i: usize,
        j: usize,
        pair_a: (usize, usize),
        count_a: i64,
        pair_b: (usize, usize),
        count_b: i64,
    },
}

/// Simple undirected graph: symmetric 0/1 adjacency, zero diagonal, connected.
#[derive(Debug, Clone)]
pub struct Graph {
    name: String,
    adjacency: DMatrix<i64>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// First line `n m`, then `m` lines `u v` with 0-based endpoints.
    EdgeList,
    /// `n` lines of `n` characters from {0,1}.
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Cycle on `size` vertices (`size` even, at least 6).
    Cycle,
    /// Complete bipartite graph on `size + size` vertices minus a perfect
    /// matching: u_i ~ v_j iff i != j.  Requires `size >= 3`.
    Crown,
    /// Bipartite graph on 4·`size` vertices built from the Sylvester Hadamard
    /// matrix of order `size` (4 or 8): signed rows on one side, signed
    /// columns on the other, with (r_i, ε) ~ (c_j, δ) iff ε·δ·H[i][j] = 1.
    Hadamard,
    /// Binary `size`-cube, `size >= 3`.
    Hypercube,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Cycle => "cycle",
            Family::Crown => "crown",
            Family::Hadamard => "hadamard",
            Family::Hypercube => "hypercube",
        }
    }
}

impl Graph {
    /// Validates and wraps an integer adjacency matrix.
    pub fn from_adjacency(
        name: impl Into<String>,
        adjacency: DMatrix<i64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        let n = adjacency.nrows();
        if n == 0 || adjacency.ncols() != n {
            return Err(GraphError::Parse(format!(
                "adjacency matrix must be square and nonempty, got {}x{}",
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        if n > MAX_VERTICES {
            return Err(GraphError::Parse(format!(
                "vertex count {n} exceeds supported maximum {MAX_VERTICES}"
            )));
        }
        if let Some(ref l) = labels {
            assert_eq!(l.len(), n, "label count must match vertex count");
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0 {
                return Err(GraphError::Loop(i));
            }
            for j in 0..n {
                let a = adjacency[(i, j)];
                if a != 0 && a != 1 {
                    return Err(GraphError::Parse(format!(
                        "adjacency entries must be 0 or 1, got {a} at ({i},{j})"
                    )));
                }
                if a != adjacency[(j, i)] {
                    return Err(GraphError::Asymmetric(i, j));
                }
            }
        }
        let g = Graph {
            name: name.into(),
            adjacency,
            labels,
        };
        // connectivity
        let dist = g.bfs_from(0);
        if let Some(v) = dist.iter().position(|&d| d == usize::MAX) {
            return Err(GraphError::Disconnected(v));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn adjacency(&self) -> &DMatrix<i64> {
        &self.adjacency
    }

    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.n()).filter(|&u| self.adjacency[(v, u)] == 1).count()
    }

    /// BFS distances from `start`; unreachable vertices get `usize::MAX`.
    pub fn bfs_from(&self, start: usize) -> Vec<usize> {
        let n = self.n();
        let mut dist = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if self.adjacency[(u, v)] == 1 && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Parses a graph from text in the given format.  Accepts LF or CRLF line
/// endings; blank lines are ignored.
pub fn load_graph(text: &str, format: InputFormat) -> Result<Graph, GraphError> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    match format {
        InputFormat::EdgeList => load_edge_list(&lines),
        InputFormat::Dense => load_dense(&lines),
    }
}

fn load_edge_list(lines: &[&str]) -> Result<Graph, GraphError> {
    let header = lines
        .first()
        .ok_or_else(|| GraphError::Parse("empty input".into()))?;
    let mut it = header.split_whitespace();
    let n: usize = parse_token(it.next(), "vertex count")?;
    let m: usize = parse_token(it.next(), "edge count")?;
    if it.next().is_some() {
        return Err(GraphError::Parse(format!(
            "header must be exactly `n m`, got `{header}`"
        )));
    }
    if n == 0 {
        return Err(GraphError::Parse("vertex count must be positive".into()));
    }
    if n > MAX_VERTICES {
        return Err(GraphError::Parse(format!(
            "vertex count {n} exceeds supported maximum {MAX_VERTICES}"
        )));
    }
    if lines.len() != m + 1 {
        return Err(GraphError::Parse(format!(
            "expected {m} edge lines after the header, found {}",
            lines.len() - 1
        )));
    }
    let mut adjacency = DMatrix::<i64>::zeros(n, n);
    let mut seen = BTreeSet::new();
    for line in &lines[1..] {
        let mut it = line.split_whitespace();
        let u: usize = parse_token(it.next(), "edge endpoint")?;
        let v: usize = parse_token(it.next(), "edge endpoint")?;
        if it.next().is_some() {
            return Err(GraphError::Parse(format!(
                "edge line must be exactly `u v`, got `{line}`"
            )));
        }
        if u >= n || v >= n {
            return Err(GraphError::Parse(format!(
                "edge {u} {v} references a vertex outside 0..{n}"
            )));
        }
        if u == v {
            return Err(GraphError::Loop(u));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(GraphError::DuplicateEdge(key.0, key.1));
        }
        adjacency[(u, v)] = 1;
        adjacency[(v, u)] = 1;
    }
    Graph::from_adjacency(format!("edgelist(n={n},m={m})"), adjacency, None)
}

fn load_dense(lines: &[&str]) -> Result<Graph, GraphError> {
    let n = lines.len();
    if n == 0 {
        return Err(GraphError::Parse("empty input".into()));
    }
    if n > MAX_VERTICES {
        return Err(GraphError::Parse(format!(
            "vertex count {n} exceeds supported maximum {MAX_VERTICES}"
        )));
    }
    let mut adjacency = DMatrix::<i64>::zeros(n, n);
    for (i, line) in lines.iter().enumerate() {
        if line.chars().count() != n {
            return Err(GraphError::Parse(format!(
                "row {i} has {} characters, expected {n}",
                line.chars().count()
            )));
        }
        for (j, ch) in line.chars().enumerate() {
            adjacency[(i, j)] = match ch {
                '0' => 0,
                '1' => 1,
                other => {
                    return Err(GraphError::Parse(format!(
                        "unexpected character `{other}` at row {i}, column {j}"
                    )))
                }
            };
        }
    }
    Graph::from_adjacency(format!("dense(n={n})"), adjacency, None)
}

fn parse_token(tok: Option<&str>, what: &str) -> Result<usize, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::Parse(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| GraphError::Parse(format!("invalid {what} `{tok}`")))
}

/// Builds one of the built-in graph families.
pub fn generate_family(family: Family, size: usize) -> Result<Graph, GraphError> {
    match family {
        Family::Cycle => cycle(size),
        Family::Crown => crown(size),
        Family::Hadamard => hadamard_graph(size),
        Family::Hypercube => hypercube(size),
    }
}

fn invalid(family: Family, reason: impl Into<String>) -> GraphError {
    GraphError::InvalidSize {
        family: family.as_str().into(),
        reason: reason.into(),
    }
}

fn cycle(size: usize) -> Result<Graph, GraphError> {
    if size < 6 || !size.is_multiple_of(2) {
        return Err(invalid(Family::Cycle, "size must be an even integer >= 6"));
    }
    let mut adjacency = DMatrix::<i64>::zeros(size, size);
    for v in 0..size {
        let w = (v + 1) % size;
        adjacency[(v, w)] = 1;
        adjacency[(w, v)] = 1;
    }
    Graph::from_adjacency(format!("cycle({size})"), adjacency, None)
}

fn crown(size: usize) -> Result<Graph, GraphError> {
    if size < 3 {
        return Err(invalid(Family::Crown, "size must be at least 3"));
    }
    let n = 2 * size;
    let mut adjacency = DMatrix::<i64>::zeros(n, n);
    for i in 0..size {
        for j in 0..size {
            if i != j {
                adjacency[(i, size + j)] = 1;
                adjacency[(size + j, i)] = 1;
            }
        }
    }
    let labels = (0..size)
        .map(|i| format!("u{i}"))
        .chain((0..size).map(|j| format!("v{j}")))
        .collect();
    Graph::from_adjacency(format!("crown({size})"), adjacency, Some(labels))
}

/// Sylvester Hadamard matrix of order `m` (a power of two).
fn sylvester(m: usize) -> DMatrix<i64> {
    assert!(m.is_power_of_two());
    let mut h = DMatrix::<i64>::from_element(1, 1, 1);
    while h.nrows() < m {
        let k = h.nrows();
        let mut next = DMatrix::<i64>::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                next[(i, j)] = h[(i, j)];
                next[(i, j + k)] = h[(i, j)];
                next[(i + k, j)] = h[(i, j)];
                next[(i + k, j + k)] = -h[(i, j)];
            }
        }
        h = next;
    }
    h
}

fn hadamard_graph(size: usize) -> Result<Graph, GraphError> {
    if size != 4 && size != 8 {
        return Err(invalid(Family::Hadamard, "built-in orders are 4 and 8"));
    }
    let m = size;
    let h = sylvester(m);
    // Vertex layout: (row i, sign ε) at index i + ε·m for ε in {0 -> +, 1 -> -},
    // then (column j, sign δ) at index 2m + j + δ·m.
    let n = 4 * m;
    let sign = |e: usize| if e == 0 { 1 } else { -1 };
    let mut adjacency = DMatrix::<i64>::zeros(n, n);
    for i in 0..m {
        for e in 0..2 {
            for j in 0..m {
                for d in 0..2 {
                    if sign(e) * sign(d) * h[(i, j)] == 1 {
                        let a = i + e * m;
                        let b = 2 * m + j + d * m;
                        adjacency[(a, b)] = 1;
                        adjacency[(b, a)] = 1;
                    }
                }
            }
        }
    }
    let labels = (0..2)
        .flat_map(|e| (0..m).map(move |i| format!("r{i}{}", if e == 0 { '+' } else { '-' })))
        .chain((0..2).flat_map(|d| (0..m).map(move |j| format!("c{j}{}", if d == 0 { '+' } else { '-' }))))
        .collect::<Vec<_>>();
    // Reorder labels to match the index layout above.
    let mut ordered = vec![String::new(); n];
    for (idx, lab) in labels.into_iter().enumerate() {
        ordered[idx] = lab;
    }
    Graph::from_adjacency(format!("hadamard({size})"), adjacency, Some(ordered))
}

fn hypercube(size: usize) -> Result<Graph, GraphError> {
    if size < 3 {
        return Err(invalid(Family::Hypercube, "dimension must be at least 3"));
    }
    let n = 1usize
        .checked_shl(size as u32)
        .filter(|&n| n <= MAX_VERTICES)
        .ok_or_else(|| {
            invalid(
                Family::Hypercube,
                format!("2^{size} vertices exceeds supported maximum {MAX_VERTICES}"),
            )
        })?;
    let mut adjacency = DMatrix::<i64>::zeros(n, n);
    for x in 0..n {
        for b in 0..size {
            let y = x ^ (1 << b);
            adjacency[(x, y)] = 1;
        }
    }
    let labels = (0..n).map(|x| format!("{x:0size$b}")).collect();
    Graph::from_adjacency(format!("hypercube({size})"), adjacency, Some(labels))
}

/// Exact distance data for a certified distance-regular graph.
#[derive(Debug, Clone)]
pub struct DistanceRegularData {
    pub diameter: usize,
    pub valency: usize,
    /// `dist[x][y]`, exact BFS distances.
    pub dist: Vec<Vec<usize>>,
    /// 0/1 distance matrices `A_0, ..., A_D`.
    pub distance_matrices: Vec<DMatrix<i64>>,
    /// `intersection[h][i][j]` = |Γ_i(x) ∩ Γ_j(y)| for any pair at distance h.
    pub intersection: Vec<Vec<Vec<i64>>>,
    /// Cell sizes `k_i = |Γ_i(x)|` (independent of x).
    pub cell_sizes: Vec<i64>,
    /// Set when the diameter is below 3; such graphs carry full distance data
    /// but are too shallow for the q-Racah machinery downstream.
    pub small_diameter: bool,
}

impl DistanceRegularData {
    /// `c_i = |Γ_{i-1}(x) ∩ Γ_1(y)|` for y at distance i.
    pub fn c(&self, i: usize) -> i64 {
        self.intersection[i][i - 1][1]
    }

    /// `b_i = |Γ_{i+1}(x) ∩ Γ_1(y)|` for y at distance i.
    pub fn b(&self, i: usize) -> i64 {
        self.intersection[i][i + 1][1]
    }

    /// `a_i = |Γ_i(x) ∩ Γ_1(y)|` for y at distance i.
    pub fn a(&self, i: usize) -> i64 {
        self.intersection[i][i][1]
    }

    /// Vertices at each distance from `x`.
    pub fn cells(&self, x: usize) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.diameter + 1];
        for (y, &d) in self.dist[x].iter().enumerate() {
            cells[d].push(y);
        }
        cells
    }
}

/// Certifies distance-regularity by exhaustive integer counting.
///
/// For every ordered pair (x, y) the table |Γ_i(x) ∩ Γ_j(y)| is compared
/// against the table of the first pair seen at the same distance; the first
/// disagreement is reported as a witness.
pub fn compute_distance_data(g: &Graph) -> Result<DistanceRegularData, GraphError> {
    let n = g.n();
    let deg0 = g.degree(0);
    for v in 1..n {
        let d = g.degree(v);
        if d != deg0 {
            return Err(GraphError::NotRegular {
                vertex_a: 0,
                degree_a: deg0,
                vertex_b: v,
                degree_b: d,
            });
        }
    }

    let dist: Vec<Vec<usize>> = (0..n).map(|v| g.bfs_from(v)).collect();
    let diameter = dist
        .iter()
        .flat_map(|row| row.iter().copied())
        .max()
        .expect("nonempty graph");

    let dd = diameter + 1;
    let mut intersection: Vec<Vec<Vec<i64>>> = Vec::with_capacity(dd);
    let mut reference_pair: Vec<Option<(usize, usize)>> = vec![None; dd];
    intersection.resize(dd, vec![vec![0; dd]; dd]);

    let mut table = vec![vec![0i64; dd]; dd];
    for x in 0..n {
        for y in 0..n {
            let h = dist[x][y];
            for row in table.iter_mut() {
                row.fill(0);
            }
            for z in 0..n {
                table[dist[x][z]][dist[y][z]] += 1;
            }
            match reference_pair[h] {
                None => {
                    reference_pair[h] = Some((x, y));
                    intersection[h] = table.clone();
                }
                Some(pair_a) => {
                    for i in 0..dd {
                        for j in 0..dd {
                            if intersection[h][i][j] != table[i][j] {
                                return Err(GraphError::NotDistanceRegular {
                                    h,
                                    i,
                                    j,
                                    pair_a,
                                    count_a: intersection[h][i][j],
                                    pair_b: (x, y),
                                    count_b: table[i][j],
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    let distance_matrices: Vec<DMatrix<i64>> = (0..dd)
        .map(|k| DMatrix::from_fn(n, n, |x, y| i64::from(dist[x][y] == k)))
        .collect();
    let cell_sizes: Vec<i64> = (0..dd).map(|i| intersection[0][i][i]).collect();

    Ok(DistanceRegularData {
        diameter,
        valency: deg0,
        dist,
        distance_matrices,
        intersection,
        cell_sizes,
        small_diameter: diameter < 3,
    })
}
