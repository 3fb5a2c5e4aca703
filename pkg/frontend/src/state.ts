export type Vote = "up" | "down";

/** Local view state; the label document itself is never mutated. */
export interface ViewState {
  expanded: Set<string>; // case ids with their evidence revealed
  votes: Map<string, Vote>; // latest local vote per match, mirroring the server
  notice: string | null;
}

export function initialState(): ViewState {
  return { expanded: new Set(), votes: new Map(), notice: null };
}

export function toggleCase(state: ViewState, caseId: string): ViewState {
  const expanded = new Set(state.expanded);
  if (expanded.has(caseId)) {
    expanded.delete(caseId);
  } else {
    expanded.add(caseId);
  }
  return { ...state, expanded };
}

export function applyVote(state: ViewState, matchId: string, vote: Vote): ViewState {
  const votes = new Map(state.votes);
  votes.set(matchId, vote);
  return { ...state, votes, notice: null };
}

export function rollbackVote(
  state: ViewState,
  matchId: string,
  previous: Vote | undefined,
  notice: string,
): ViewState {
  const votes = new Map(state.votes);
  if (previous === undefined) {
    votes.delete(matchId);
  } else {
    votes.set(matchId, previous);
  }
  return { ...state, votes, notice };
}
