// Hash router and page wiring. Responses for superseded navigations are
// discarded via a monotonically increasing navigation token.
import { ApiClient } from "./api.js";
import { renderMemeDashboard, renderThemeBrowser, renderUserPanel, toast, } from "./views.js";
export class App {
    constructor(doc, root, options = {}) {
        this.doc = doc;
        this.root = root;
        this.navToken = 0;
        this.api = new ApiClient(options.apiBase ?? resolveApiBase(doc));
        this.annotator = options.annotator ?? "dashboard";
        this.maxNodes = options.maxNodes;
    }
    start() {
        const win = this.doc.defaultView;
        if (win) {
            win.addEventListener("hashchange", () => void this.route());
        }
        void this.route();
    }
    async route() {
        const token = ++this.navToken;
        const hash = this.doc.defaultView?.location.hash ?? "";
        const memeMatch = /^#\/meme\/([a-z]+)\/(.+)$/.exec(hash);
        try {
            if (memeMatch) {
                await this.showMeme(token, memeMatch[1], decodeURIComponent(memeMatch[2]));
            }
            else {
                await this.showThemes(token);
            }
        }
        catch (err) {
            if (token === this.navToken) {
                this.root.replaceChildren();
                const msg = this.doc.createElement("p");
                msg.className = "error-state";
                msg.textContent = `Request failed: ${String(err)}`;
                this.root.appendChild(msg);
            }
        }
    }
    stale(token) {
        return token !== this.navToken;
    }
    async showThemes(token) {
        const themes = await this.api.themes();
        const memesByTheme = new Map();
        for (const theme of themes) {
            memesByTheme.set(theme.name, await this.api.themeMemes(theme.name, "tweets", 25));
        }
        if (this.stale(token))
            return;
        this.root.replaceChildren(renderThemeBrowser(this.doc, themes, memesByTheme));
    }
    async showMeme(token, kind, pathValue) {
        const [detail, graph, series, cooccurrence] = await Promise.all([
            this.api.memeDetail(kind, pathValue),
            this.api.memeNetwork(kind, pathValue),
            this.api.memeTimeseries(kind, pathValue),
            this.api.memeCooccurrence(kind, pathValue),
        ]);
        if (this.stale(token))
            return;
        const page = renderMemeDashboard(this.doc, this.api, kind, pathValue, detail, graph, series.buckets, cooccurrence, {
            onNodeClick: (node) => void this.openUserPanel(node),
            onTag: (label) => void this.tagMeme(kind, detail.meme.value, label),
        }, this.maxNodes);
        const back = this.doc.createElement("a");
        back.href = "#/themes";
        back.textContent = "< themes";
        back.className = "back-link";
        this.root.replaceChildren(back, page);
    }
    async openUserPanel(node) {
        let stats;
        try {
            stats = await this.api.user(node.id);
        }
        catch {
            // mentioned-only users have no tracked activity; show what we know
            stats = {
                user_id: node.id,
                screen_name: node.screen_name,
                activity: 0,
                sentiment_mean: null,
                labels: { partisanship: node.partisanship ?? null, language: null },
            };
        }
        this.closeUserPanel();
        const overlay = renderUserPanel(this.doc, stats, {
            onTag: (label) => void this.tagUser(node, label),
            onClose: () => this.closeUserPanel(),
        });
        this.root.appendChild(overlay);
    }
    closeUserPanel() {
        this.root.querySelector(".user-panel-overlay")?.remove();
    }
    async tagMeme(kind, value, label) {
        const target = `meme:${kind}:${kind === "phrase" ? value.replace(/ /g, "_") : value}`;
        const result = await this.api.annotate(this.annotator, target, label);
        toast(this.doc, this.root, `Tagged ${target} as ${label} (flag #${result.id})`);
    }
    async tagUser(node, label) {
        const target = node.id >= 0 ? `user:${node.id}` : `user:@${node.screen_name.toLowerCase()}`;
        const result = await this.api.annotate(this.annotator, target, label);
        toast(this.doc, this.root, `Tagged @${node.screen_name} as ${label} (flag #${result.id})`);
    }
}
export function resolveApiBase(doc) {
    const win = doc.defaultView;
    if (win) {
        const param = new URLSearchParams(win.location.search).get("api");
        if (param)
            return param;
    }
    return "http://127.0.0.1:8000";
}
export function boot(doc) {
    const root = doc.getElementById("app");
    if (!root)
        throw new Error("missing #app container");
    const app = new App(doc, root);
    app.start();
    return app;
}
