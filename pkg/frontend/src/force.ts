// Seeded force-directed layout with a fixed iteration budget, so the same
// snapshot always renders the same picture. Repulsion + spring + centering
// on a phyllotaxis initial placement.

export interface LayoutNode {
  id: number;
  x: number;
  y: number;
}

export interface LayoutEdge {
  source: number;
  target: number;
}

// deterministic 32-bit LCG
export function lcg(seed: number): () => number {
  let state = seed >>> 0 || 1;
  return () => {
    state = (state * 1664525 + 1013904223) >>> 0;
    return state / 0x100000000;
  };
}

export function layout(
  ids: number[],
  edges: LayoutEdge[],
  width: number,
  height: number,
  seed = 42,
): Map<number, LayoutNode> {
  const rand = lcg(seed);
  const n = ids.length;
  const nodes: LayoutNode[] = ids.map((id, i) => {
    // phyllotaxis spiral plus a seeded nudge to break symmetry
    const radius = 12 * Math.sqrt(i + 0.5);
    const angle = i * 2.399963229728653;
    return {
      id,
      x: radius * Math.cos(angle) + (rand() - 0.5) * 4,
      y: radius * Math.sin(angle) + (rand() - 0.5) * 4,
    };
  });
  const index = new Map(nodes.map((node, i) => [node.id, i]));
  const springs = edges
    .map((e) => [index.get(e.source), index.get(e.target)] as [number, number])
    .filter(([a, b]) => a !== undefined && b !== undefined && a !== b);

  const iterations = Math.max(20, Math.min(150, Math.floor(40000 / Math.max(n, 1))));
  const springLength = 60;
  for (let iter = 0; iter < iterations; iter++) {
    const temperature = 1 - iter / iterations;
    const fx = new Float64Array(n);
    const fy = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = nodes[i].x - nodes[j].x;
        let dy = nodes[i].y - nodes[j].y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 0.01) {
          dx = (rand() - 0.5) * 0.1;
          dy = (rand() - 0.5) * 0.1;
          d2 = dx * dx + dy * dy;
        }
        const push = 1200 / d2;
        fx[i] += dx * push;
        fy[i] += dy * push;
        fx[j] -= dx * push;
        fy[j] -= dy * push;
      }
    }
    for (const [a, b] of springs) {
      const dx = nodes[b].x - nodes[a].x;
      const dy = nodes[b].y - nodes[a].y;
      const dist = Math.sqrt(dx * dx + dy * dy) || 0.01;
      const pull = (dist - springLength) * 0.02;
      fx[a] += (dx / dist) * pull * dist;
      fy[a] += (dy / dist) * pull * dist;
      fx[b] -= (dx / dist) * pull * dist;
      fy[b] -= (dy / dist) * pull * dist;
    }
    for (let i = 0; i < n; i++) {
      fx[i] -= nodes[i].x * 0.02; // gentle centering
      fy[i] -= nodes[i].y * 0.02;
      const mag = Math.sqrt(fx[i] * fx[i] + fy[i] * fy[i]) || 1;
      const step = Math.min(mag, 30 * temperature);
      nodes[i].x += (fx[i] / mag) * step;
      nodes[i].y += (fy[i] / mag) * step;
    }
  }

  // fit into the viewport with a margin
  const xs = nodes.map((p) => p.x);
  const ys = nodes.map((p) => p.y);
  const minX = Math.min(...xs, -1);
  const maxX = Math.max(...xs, 1);
  const minY = Math.min(...ys, -1);
  const maxY = Math.max(...ys, 1);
  const margin = 30;
  const scaleX = (width - 2 * margin) / (maxX - minX || 1);
  const scaleY = (height - 2 * margin) / (maxY - minY || 1);
  const scale = Math.min(scaleX, scaleY);
  for (const node of nodes) {
    node.x = margin + (node.x - minX) * scale;
    node.y = margin + (node.y - minY) * scale;
  }
  return new Map(nodes.map((node) => [node.id, node]));
}
