// SVG renderer for meme diffusion networks.
//
// Visual encoding contract (asserted by tests):
//   - node radius is a monotone function of retweeted_count
//   - node fill encodes partisanship sign: blue negative (left), red
//     positive (right), gray when unset
//   - link color: mention = orange, retweet = blue
//   - link width grows with weight, capped
//   - above MAX_RENDER_NODES nodes only the top-K by degree render, with
//     an explicit "showing K of N" notice
import { layout } from "./force.js";
export const COLORS = {
    left: "#3b6fd4",
    right: "#d64545",
    neutral: "#9aa0a6",
    mention: "#e8883a",
    retweet: "#4a90d9",
};
export const MAX_RENDER_NODES = 2000;
const SVG_NS = "http://www.w3.org/2000/svg";
export function nodeRadius(retweetedCount) {
    return 4 + 2.5 * Math.sqrt(Math.max(retweetedCount, 0));
}
export function nodeColor(node) {
    if (node.partisanship === undefined || node.partisanship === null)
        return COLORS.neutral;
    if (node.partisanship < 0)
        return COLORS.left;
    if (node.partisanship > 0)
        return COLORS.right;
    return COLORS.neutral;
}
export function linkColor(type) {
    return type === "mention" ? COLORS.mention : COLORS.retweet;
}
export function linkWidth(weight) {
    return Math.min(1 + Math.log2(Math.max(weight, 1)), 6);
}
export function topKByDegree(graph, k) {
    const degree = new Map();
    for (const node of graph.nodes)
        degree.set(node.id, 0);
    for (const link of graph.links) {
        degree.set(link.source, (degree.get(link.source) ?? 0) + 1);
        degree.set(link.target, (degree.get(link.target) ?? 0) + 1);
    }
    const keep = new Set([...graph.nodes]
        .sort((a, b) => (degree.get(b.id) ?? 0) - (degree.get(a.id) ?? 0) || a.id - b.id)
        .slice(0, k)
        .map((n) => n.id));
    return {
        meme: graph.meme,
        nodes: graph.nodes.filter((n) => keep.has(n.id)),
        links: graph.links.filter((l) => keep.has(l.source) && keep.has(l.target)),
    };
}
export function renderNetwork(doc, graph, options = {}) {
    const width = options.width ?? 760;
    const height = options.height ?? 520;
    const maxNodes = options.maxNodes ?? MAX_RENDER_NODES;
    let shown = graph;
    let notice = null;
    if (graph.nodes.length > maxNodes) {
        shown = topKByDegree(graph, maxNodes);
        notice = `showing ${shown.nodes.length} of ${graph.nodes.length} users (top by degree)`;
    }
    const positions = layout(shown.nodes.map((n) => n.id), shown.links, width, height);
    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    svg.setAttribute("class", "network-view");
    const linkGroup = doc.createElementNS(SVG_NS, "g");
    linkGroup.setAttribute("class", "links");
    for (const link of shown.links) {
        const a = positions.get(link.source);
        const b = positions.get(link.target);
        if (!a || !b)
            continue;
        const line = doc.createElementNS(SVG_NS, "line");
        line.setAttribute("x1", a.x.toFixed(1));
        line.setAttribute("y1", a.y.toFixed(1));
        line.setAttribute("x2", b.x.toFixed(1));
        line.setAttribute("y2", b.y.toFixed(1));
        line.setAttribute("stroke", linkColor(link.type));
        line.setAttribute("stroke-width", linkWidth(link.weight).toFixed(2));
        line.setAttribute("stroke-opacity", "0.75");
        line.setAttribute("data-type", link.type);
        linkGroup.appendChild(line);
    }
    svg.appendChild(linkGroup);
    const nodeGroup = doc.createElementNS(SVG_NS, "g");
    nodeGroup.setAttribute("class", "nodes");
    for (const node of shown.nodes) {
        const pos = positions.get(node.id);
        if (!pos)
            continue;
        const circle = doc.createElementNS(SVG_NS, "circle");
        circle.setAttribute("cx", pos.x.toFixed(1));
        circle.setAttribute("cy", pos.y.toFixed(1));
        circle.setAttribute("r", nodeRadius(node.retweeted_count).toFixed(2));
        circle.setAttribute("fill", nodeColor(node));
        circle.setAttribute("data-user-id", String(node.id));
        circle.setAttribute("data-screen-name", node.screen_name);
        circle.setAttribute("class", "network-node");
        const title = doc.createElementNS(SVG_NS, "title");
        title.textContent = `@${node.screen_name} (retweeted ${node.retweeted_count}x)`;
        circle.appendChild(title);
        if (options.onNodeClick) {
            circle.addEventListener("click", () => options.onNodeClick(node));
        }
        nodeGroup.appendChild(circle);
    }
    svg.appendChild(nodeGroup);
    return { svg, notice, renderedNodeCount: shown.nodes.length };
}
