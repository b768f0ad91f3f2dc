// Typed client for the memestream REST API. The dashboard talks to no
// other backend and keeps no state that a refresh cannot rebuild.

export interface ThemeSummary {
  name: string;
  description: string | null;
  meme_count: number;
}

export interface MemeKey {
  kind: string;
  value: string;
}

export interface MemeRow {
  meme_key: MemeKey;
  path_value: string;
  n_tweets: number;
  n_users: number;
  last_seen: string | null;
}

export interface MemeDetail {
  meme: MemeKey;
  n_tweets: number;
  n_users: number;
  n_retweet_edges: number;
  n_mention_edges: number;
  mean_degree: number;
  lcc_size: number;
  first_seen: string | null;
  last_seen: string | null;
  annotations: Record<string, number>;
  definition: string | null;
}

export interface NetworkNode {
  id: number;
  screen_name: string;
  tweet_count: number;
  retweeted_count: number;
  partisanship?: number;
}

export interface NetworkLink {
  source: number;
  target: number;
  type: "retweet" | "mention";
  weight: number;
}

export interface NetworkGraph {
  meme: MemeKey;
  nodes: NetworkNode[];
  links: NetworkLink[];
}

export interface TimeBucket {
  bucket_start: string;
  tweet_count: number;
  user_count: number;
}

export interface CooccurrenceRow {
  meme_b: MemeKey;
  joint_count: number;
  jaccard: number;
}

export interface UserStats {
  user_id: number;
  screen_name: string;
  activity: number;
  sentiment_mean: number | null;
  labels: { partisanship: number | null; language: string | null };
  annotations?: Record<string, number>;
}

export interface AnnotationResponse {
  id: number;
  target: string;
  label: string;
  repeat: number;
  resolved: boolean;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, init);
  const body = await resp.json();
  if (!resp.ok && resp.status !== 422) {
    throw new ApiError(resp.status, body.code ?? "error", body.message ?? resp.statusText);
  }
  return body as T;
}

export class ApiClient {
  constructor(public base: string) {}

  themes(): Promise<ThemeSummary[]> {
    return request(this.base, "/api/themes");
  }

  themeMemes(name: string, sort = "tweets", limit = 50): Promise<MemeRow[]> {
    return request(
      this.base,
      `/api/themes/${encodeURIComponent(name)}/memes?sort=${sort}&limit=${limit}`,
    );
  }

  memePath(kind: string, pathValue: string): string {
    return `/api/memes/${kind}/${encodeURIComponent(pathValue)}`;
  }

  memeDetail(kind: string, pathValue: string): Promise<MemeDetail> {
    return request(this.base, this.memePath(kind, pathValue));
  }

  memeNetwork(kind: string, pathValue: string): Promise<NetworkGraph> {
    return request(this.base, `${this.memePath(kind, pathValue)}/network?format=json`);
  }

  memeTimeseries(kind: string, pathValue: string, interval = "minute"): Promise<{ buckets: TimeBucket[] }> {
    return request(this.base, `${this.memePath(kind, pathValue)}/timeseries?interval=${interval}`);
  }

  memeCooccurrence(kind: string, pathValue: string, k = 10): Promise<CooccurrenceRow[]> {
    return request(this.base, `${this.memePath(kind, pathValue)}/cooccurrence?k=${k}`);
  }

  downloadUrl(kind: string, pathValue: string, format: string): string {
    return `${this.base}${this.memePath(kind, pathValue)}/network?format=${format}`;
  }

  user(userId: number): Promise<UserStats> {
    return request(this.base, `/api/users/${userId}`);
  }

  annotate(annotator: string, target: string, label: string): Promise<AnnotationResponse> {
    return request(this.base, "/api/annotations", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ annotator, target, label }),
    });
  }
}
