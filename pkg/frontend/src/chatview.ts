/**
 * Session explorer model: the transcript side by side with label chips.
 *
 * Rows are aligned by utterance; every selected source contributes one chip
 * column whether or not it labeled that utterance, so two sources always
 * render as two aligned columns.
 */

import { compactDocument } from "./format.js";
import type { ChatView, LabelDocument } from "./types.js";

export interface Chip {
  source: string;
  document: LabelDocument | null;
  text: string; // "" when the source has no label here
}

export interface ChatRow {
  index: number;
  speaker: string;
  timestamp?: string;
  text: string;
  chips: Chip[];
}

export function chatRows(view: ChatView, sources?: string[]): ChatRow[] {
  const columns = sources && sources.length > 0 ? sources : view.sources;
  return view.utterances.map((utt) => ({
    index: utt.index,
    speaker: utt.speaker_id,
    ...(utt.timestamp !== undefined ? { timestamp: utt.timestamp } : {}),
    text: utt.text,
    chips: columns.map((source) => {
      const document = utt.annotations[source] ?? null;
      return { source, document, text: document ? compactDocument(document) : "" };
    }),
  }));
}
