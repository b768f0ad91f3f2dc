// Typed client for the memestream REST API. The dashboard talks to no
// other backend and keeps no state that a refresh cannot rebuild.
export class ApiError extends Error {
    constructor(status, code, message) {
        super(message);
        this.status = status;
        this.code = code;
    }
}
async function request(base, path, init) {
    const resp = await fetch(base + path, init);
    const body = await resp.json();
    if (!resp.ok && resp.status !== 422) {
        throw new ApiError(resp.status, body.code ?? "error", body.message ?? resp.statusText);
    }
    return body;
}
export class ApiClient {
    constructor(base) {
        this.base = base;
    }
    themes() {
        return request(this.base, "/api/themes");
    }
    themeMemes(name, sort = "tweets", limit = 50) {
        return request(this.base, `/api/themes/${encodeURIComponent(name)}/memes?sort=${sort}&limit=${limit}`);
    }
    memePath(kind, pathValue) {
        return `/api/memes/${kind}/${encodeURIComponent(pathValue)}`;
    }
    memeDetail(kind, pathValue) {
        return request(this.base, this.memePath(kind, pathValue));
    }
    memeNetwork(kind, pathValue) {
        return request(this.base, `${this.memePath(kind, pathValue)}/network?format=json`);
    }
    memeTimeseries(kind, pathValue, interval = "minute") {
        return request(this.base, `${this.memePath(kind, pathValue)}/timeseries?interval=${interval}`);
    }
    memeCooccurrence(kind, pathValue, k = 10) {
        return request(this.base, `${this.memePath(kind, pathValue)}/cooccurrence?k=${k}`);
    }
    downloadUrl(kind, pathValue, format) {
        return `${this.base}${this.memePath(kind, pathValue)}/network?format=${format}`;
    }
    user(userId) {
        return request(this.base, `/api/users/${userId}`);
    }
    annotate(annotator, target, label) {
        return request(this.base, "/api/annotations", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ annotator, target, label }),
        });
    }
}
