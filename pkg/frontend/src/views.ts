// Page builders: theme browser, meme dashboard, and the user panel
// overlay. Everything renders into plain DOM so the views are testable
// without a real browser.

import {
  ApiClient,
  CooccurrenceRow,
  MemeDetail,
  MemeRow,
  NetworkGraph,
  NetworkNode,
  ThemeSummary,
  TimeBucket,
  UserStats,
} from "./api.js";
import { COLORS, renderNetwork } from "./network.js";

export const TAG_LABELS = ["truthy", "spam", "legitimate"] as const;

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function memeHash(row: MemeRow): string {
  return `#/meme/${row.meme_key.kind}/${encodeURIComponent(row.path_value)}`;
}

export function memeLabel(kind: string, value: string): string {
  if (kind === "hashtag") return `#${value}`;
  if (kind === "mention") return `@${value}`;
  return value;
}

// -- theme browser --

export function renderThemeBrowser(
  doc: Document,
  themes: ThemeSummary[],
  memesByTheme: Map<string, MemeRow[]>,
): HTMLElement {
  const root = el(doc, "section", "theme-browser");
  if (themes.length === 0) {
    root.appendChild(el(doc, "p", "empty-state", "No themes configured."));
    return root;
  }
  for (const theme of themes) {
    const card = el(doc, "article", "theme-card");
    card.appendChild(el(doc, "h2", "theme-name", theme.name));
    if (theme.description) {
      card.appendChild(el(doc, "p", "theme-description", theme.description));
    }
    card.appendChild(
      el(doc, "p", "theme-meme-count", `${theme.meme_count} memes tracked`),
    );
    const list = el(doc, "ul", "meme-list");
    for (const row of memesByTheme.get(theme.name) ?? []) {
      const item = el(doc, "li", "meme-entry");
      const link = el(doc, "a", "meme-link", memeLabel(row.meme_key.kind, row.meme_key.value));
      link.setAttribute("href", memeHash(row));
      item.appendChild(link);
      item.appendChild(
        el(doc, "span", "meme-entry-stats", ` ${row.n_tweets} tweets, ${row.n_users} users`),
      );
      list.appendChild(item);
    }
    card.appendChild(list);
    root.appendChild(card);
  }
  return root;
}

// -- meme dashboard --

function statsPanel(doc: Document, detail: MemeDetail): HTMLElement {
  const panel = el(doc, "dl", "stats-panel");
  const rows: [string, string][] = [
    ["Tweets", String(detail.n_tweets)],
    ["Users", String(detail.n_users)],
    ["Mean degree", detail.mean_degree.toFixed(3)],
    ["Largest component", String(detail.lcc_size)],
    ["Retweet edges", String(detail.n_retweet_edges)],
    ["Mention edges", String(detail.n_mention_edges)],
    ["First seen", detail.first_seen ?? "-"],
    ["Last seen", detail.last_seen ?? "-"],
  ];
  for (const [label, value] of rows) {
    panel.appendChild(el(doc, "dt", undefined, label));
    panel.appendChild(el(doc, "dd", undefined, value));
  }
  return panel;
}

function sparkline(doc: Document, buckets: TimeBucket[]): SVGSVGElement {
  const width = 760;
  const height = 120;
  const svg = doc.createElementNS("http://www.w3.org/2000/svg", "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "activity-chart");
  const max = Math.max(1, ...buckets.map((b) => b.tweet_count));
  const step = buckets.length > 1 ? width / (buckets.length - 1) : width;
  const points = buckets
    .map((b, i) => `${(i * step).toFixed(1)},${(height - (b.tweet_count / max) * (height - 10) - 5).toFixed(1)}`)
    .join(" ");
  const line = doc.createElementNS("http://www.w3.org/2000/svg", "polyline");
  line.setAttribute("points", points);
  line.setAttribute("fill", "none");
  line.setAttribute("stroke", COLORS.retweet);
  line.setAttribute("stroke-width", "1.5");
  svg.appendChild(line);
  return svg;
}

function cooccurrenceList(doc: Document, rows: CooccurrenceRow[]): HTMLElement {
  const box = el(doc, "section", "cooccurrence");
  box.appendChild(el(doc, "h3", undefined, "Appears together with"));
  const list = el(doc, "ol", "cooccurrence-list");
  for (const row of rows) {
    list.appendChild(
      el(
        doc,
        "li",
        "cooccurrence-entry",
        `${memeLabel(row.meme_b.kind, row.meme_b.value)} - ${row.joint_count} joint tweets ` +
          `(jaccard ${row.jaccard.toFixed(3)})`,
      ),
    );
  }
  if (rows.length === 0) {
    list.appendChild(el(doc, "li", "cooccurrence-entry empty-state", "none yet"));
  }
  box.appendChild(list);
  return box;
}

export interface TagCallbacks {
  onTag: (label: string) => void;
}

export function tagButtons(doc: Document, callbacks: TagCallbacks): HTMLElement {
  const box = el(doc, "div", "tag-buttons");
  for (const label of TAG_LABELS) {
    const button = el(doc, "button", `tag-button tag-${label}`, label[0].toUpperCase() + label.slice(1));
    button.setAttribute("data-label", label);
    button.addEventListener("click", () => callbacks.onTag(label));
    box.appendChild(button);
  }
  return box;
}

export interface MemeDashboardHandlers {
  onNodeClick: (node: NetworkNode) => void;
  onTag: (label: string) => void;
}

export function renderMemeDashboard(
  doc: Document,
  api: ApiClient,
  kind: string,
  pathValue: string,
  detail: MemeDetail,
  graph: NetworkGraph,
  buckets: TimeBucket[],
  cooccurrence: CooccurrenceRow[],
  handlers: MemeDashboardHandlers,
  maxNodes?: number,
): HTMLElement {
  const root = el(doc, "section", "meme-dashboard");
  root.appendChild(el(doc, "h2", "meme-title", memeLabel(detail.meme.kind, detail.meme.value)));
  if (detail.definition) {
    root.appendChild(el(doc, "p", "meme-definition", detail.definition));
  }
  root.appendChild(statsPanel(doc, detail));

  const annotations = el(
    doc,
    "p",
    "annotation-summary",
    `Flags: truthy ${detail.annotations.truthy ?? 0}, spam ${detail.annotations.spam ?? 0}, ` +
      `legitimate ${detail.annotations.legitimate ?? 0}`,
  );
  root.appendChild(annotations);
  root.appendChild(tagButtons(doc, { onTag: handlers.onTag }));

  const downloads = el(doc, "div", "download-buttons");
  for (const format of ["edgelist", "graphml", "json"]) {
    const link = el(doc, "a", `download-button download-${format}`, `Download ${format}`);
    link.setAttribute("href", api.downloadUrl(kind, pathValue, format));
    link.setAttribute("download", "");
    downloads.appendChild(link);
  }
  root.appendChild(downloads);

  root.appendChild(el(doc, "h3", undefined, "Activity"));
  root.appendChild(sparkline(doc, buckets));

  root.appendChild(el(doc, "h3", undefined, "Diffusion network"));
  const rendered = renderNetwork(doc, graph, {
    onNodeClick: handlers.onNodeClick,
    maxNodes,
  });
  if (rendered.notice) {
    root.appendChild(el(doc, "p", "network-notice", rendered.notice));
  }
  root.appendChild(rendered.svg);

  root.appendChild(cooccurrenceList(doc, cooccurrence));
  return root;
}

// -- user panel overlay --

export function renderUserPanel(
  doc: Document,
  stats: UserStats,
  handlers: { onTag: (label: string) => void; onClose: () => void },
): HTMLElement {
  const overlay = el(doc, "div", "user-panel-overlay");
  const panel = el(doc, "aside", "user-panel");
  panel.appendChild(el(doc, "h3", "user-handle", `@${stats.screen_name}`));

  const facts = el(doc, "dl", "user-facts");
  const push = (label: string, value: string) => {
    facts.appendChild(el(doc, "dt", undefined, label));
    facts.appendChild(el(doc, "dd", undefined, value));
  };
  push("Activity", `${stats.activity} tweets`);
  push(
    "Sentiment",
    stats.sentiment_mean === null ? "no scored tweets" : stats.sentiment_mean.toFixed(3),
  );
  push("Language", stats.labels.language ?? "unknown");

  const partisanship = stats.labels.partisanship;
  const badge = el(
    doc,
    "span",
    "partisanship-badge",
    partisanship === null
      ? "no partisanship label"
      : `partisanship ${partisanship.toFixed(2)}`,
  );
  badge.style.backgroundColor =
    partisanship === null
      ? COLORS.neutral
      : partisanship < 0
        ? COLORS.left
        : partisanship > 0
          ? COLORS.right
          : COLORS.neutral;
  panel.appendChild(facts);
  panel.appendChild(badge);
  panel.appendChild(tagButtons(doc, { onTag: handlers.onTag }));

  const close = el(doc, "button", "close-panel", "Close");
  close.addEventListener("click", handlers.onClose);
  panel.appendChild(close);
  overlay.appendChild(panel);
  return overlay;
}

export function toast(doc: Document, container: HTMLElement, message: string): void {
  const note = el(doc, "div", "toast", message);
  container.appendChild(note);
  setTimeout(() => note.remove(), 4000);
}
