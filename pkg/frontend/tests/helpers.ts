/** Shared test scaffolding: a recording fake fetch the ApiClient accepts. */

export interface RecordedCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: unknown;
}

export interface FakeRoute {
  method: string;
  path: string; // exact match on the path part, query included
  status?: number;
  reply: unknown | ((call: RecordedCall) => unknown);
}

export function fakeFetch(routes: FakeRoute[]) {
  const calls: RecordedCall[] = [];
  const fetchFn = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const headers = Object.fromEntries(
      Object.entries((init?.headers as Record<string, string>) ?? {}).map(([k, v]) => [
        k.toLowerCase(),
        v,
      ]),
    );
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    const call: RecordedCall = { url, method, headers, body };
    calls.push(call);

    const route = routes.find((r) => r.method === method && url.endsWith(r.path));
    if (!route) {
      return new Response(
        JSON.stringify({
          error: { http_status: 404, code: "not_found", message: `no fake route for ${method} ${url}`, details: {} },
        }),
        { status: 404 },
      );
    }
    const payload = typeof route.reply === "function" ? route.reply(call) : route.reply;
    return new Response(JSON.stringify(payload), { status: route.status ?? 200 });
  };
  return { fetchFn: fetchFn as typeof fetch, calls };
}

export function callsTo(calls: RecordedCall[], method: string, pathPart: string): RecordedCall[] {
  return calls.filter((c) => c.method === method && c.url.includes(pathPart));
}
