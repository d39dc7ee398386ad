//! Nearest-neighbour message passing between turbines.
//!
//! A node's out-edges point at its `k` nearest other nodes; when the node
//! sends, every one of those neighbours receives the message. Delivery is
//! double buffered: a message sent at step `t` is readable at `t + 1`, and an
//! inbox is emptied by reading it.

use serde::Serialize;

use crate::geom::Vec2;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborGraph {
    k: usize,
    /// `edges[i]` lists the receivers of node `i`'s messages, nearest first.
    edges: Vec<Vec<usize>>,
}

impl NeighborGraph {
    /// Builds the directed kNN graph by Euclidean distance. Ties go to the
    /// lower index.
    pub fn build(positions: &[Vec2], k: usize) -> Self {
        let n = positions.len();
        let edges = (0..n)
            .map(|i| {
                let mut others: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (positions[i].distance(positions[j]), j))
                    .collect();
                others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                others.into_iter().take(k).map(|(_, j)| j).collect()
            })
            .collect();
        Self { k, edges }
    }

    /// Signed variant for callers holding a configured integer.
    pub fn try_build(positions: &[Vec2], k: i64) -> Result<Self> {
        if k < 0 {
            return Err(Error::Contract(format!("neighbour count must be >= 0, got {k}")));
        }
        Ok(Self::build(positions, k as usize))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbours(&self, node: usize) -> &[usize] {
        &self.edges[node]
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Flat `(sender, receiver)` pairs, in sender order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(i, out)| out.iter().map(move |&j| (i, j)))
            .collect()
    }
}

/// A turbine's broadcast: where it is and which way the wind blows there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Message {
    pub sender_position: Vec2,
    pub sender_wind: Vec2,
    pub sent_at: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Inbox {
    pub messages: Vec<Message>,
}

impl Inbox {
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

/// Double-buffered inboxes for every node of a graph.
#[derive(Debug, Clone)]
pub struct Mailboxes {
    step: u64,
    pending: Vec<Inbox>,
    readable: Vec<Inbox>,
    delivered: u64,
}

impl Mailboxes {
    pub fn new(nodes: usize) -> Self {
        Self {
            step: 0,
            pending: vec![Inbox::default(); nodes],
            readable: vec![Inbox::default(); nodes],
            delivered: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Total inbox entries created since construction.
    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    /// Queues `message` for every neighbour of `sender`; readable next step.
    /// Returns the number of inboxes reached.
    pub fn deliver(&mut self, graph: &NeighborGraph, sender: usize, message: Message) -> Result<usize> {
        if sender >= graph.node_count() || sender >= self.pending.len() {
            return Err(Error::Contract(format!("unknown sender {sender}")));
        }
        if message.sent_at != self.step {
            return Err(Error::Contract(format!(
                "message stamped {} delivered at step {}",
                message.sent_at, self.step
            )));
        }
        let receivers = graph.neighbours(sender);
        for &r in receivers {
            self.pending[r].messages.push(message);
        }
        self.delivered += receivers.len() as u64;
        Ok(receivers.len())
    }

    /// Moves to the next step: everything sent so far becomes readable.
    pub fn advance(&mut self) {
        self.step += 1;
        for (pending, readable) in self.pending.iter_mut().zip(self.readable.iter_mut()) {
            // unread messages from the previous step are dropped: inboxes are
            // read every step
            readable.messages.clear();
            std::mem::swap(pending, readable);
        }
    }

    pub fn inbox(&self, node: usize) -> &Inbox {
        &self.readable[node]
    }

    /// Reads and clears `node`'s inbox.
    pub fn take(&mut self, node: usize) -> Inbox {
        std::mem::take(&mut self.readable[node])
    }

    /// Messages waiting for delivery at the next step.
    pub fn pending(&self, node: usize) -> &Inbox {
        &self.pending[node]
    }
}

/// Distance-weighted mean of the sender wind vectors in `inbox`:
/// `(1/n) Σ (1 - |p_i - m_p| / width) · m_w`, zero for an empty inbox.
pub fn pool_inbox(receiver: Vec2, inbox: &Inbox, farm_width: f64) -> Vec2 {
    if inbox.messages.is_empty() {
        return Vec2::ZERO;
    }
    let sum = inbox.messages.iter().fold(Vec2::ZERO, |acc, m| {
        let weight = (1.0 - receiver.distance(m.sender_position) / farm_width).clamp(0.0, 1.0);
        acc + m.sender_wind * weight
    });
    sum * (1.0 / inbox.messages.len() as f64)
}
