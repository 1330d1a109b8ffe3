/** Wire types mirroring the backend's canonical JSON. */

export type ConfidenceBand = 'high' | 'medium' | 'low' | 'unmatched';
export type Provenance = 'ai_generated' | 'manual' | 'merged';
export type AssociationOrigin = 'ai_suggested' | 'manual';

export interface AvatarRef {
  kind: 'generated_image' | 'parameterized_url';
  locator: string;
  seed_inputs: Record<string, string>;
}

export interface Persona {
  id: string;
  name: string;
  age: number;
  occupation: string;
  location: string;
  quote: string;
  tagline: string;
  background: string;
  personality_traits: string[];
  goals: string[];
  pain_points: string[];
  technical_skills: string[];
  experience_level: 'beginner' | 'intermediate' | 'advanced' | 'expert';
  confidence_score: number;
  provenance: Provenance;
  edited: boolean;
  source_persona_ids: string[];
  avatar: AvatarRef | null;
  created_at: string;
  updated_at: string;
  version?: number;
  archived?: boolean;
}

export interface JobSnapshot {
  job_id: string;
  kind: 'generation' | 'mapping' | 'sync';
  repo_id: string;
  stage: string;
  percent: number;
  error: string | null;
  warnings: string[];
  result: Record<string, unknown> | null;
  stage_history: string[];
  started_at: string | null;
  finished_at: string | null;
}

export interface PersonaBadge {
  persona_id: string;
  name: string;
  occupation: string;
  percent: number;
  band: ConfidenceBand;
  origin: AssociationOrigin;
  rationale: string;
  impact_level: 'high' | 'medium' | 'low';
}

export interface IssueRow {
  number: number;
  title: string;
  body: string;
  labels: string[];
  state: 'open' | 'closed';
  created_at: string;
  badges: PersonaBadge[];
  band: ConfidenceBand;
  confidence: number | null;
}

export interface PersonaGroup {
  persona: { id: string; name: string; occupation: string; avatar: AvatarRef | null };
  count: number;
  issues: IssueRow[];
}

export interface IssueListPayload {
  view: 'github' | 'persona';
  issues?: IssueRow[];
  groups?: PersonaGroup[];
  unmatched_issues?: IssueRow[];
}

export interface PersonaCardAssociation {
  persona: Persona;
  origin: AssociationOrigin;
  percent: number;
  band: ConfidenceBand;
  rationale: string;
  matched_goals: string[];
  matched_pain_points: string[];
  use_case_fit: string;
  impact_level: string;
}

export interface IssueDetail {
  issue: IssueRow & Record<string, unknown>;
  mapping: {
    matched_persona_ids: string[];
    primary_persona_id: string | null;
    confidence: number;
    reasoning: string;
    persona_rationales: Record<string, { origin: AssociationOrigin; tombstoned: boolean }>;
  } | null;
  personas: PersonaCardAssociation[];
  all_personas: Persona[];
}

export interface AnalyticsSummary {
  total_issues: number;
  active_personas: number;
  coverage_rate: number;
  repo_stars: number;
  label_distribution: Record<string, number>;
  persona_coverage: Record<string, number>;
}

export interface RepoSummary {
  id: string;
  url: string;
  ref: { host: string; owner: string; name: string; stars: number };
  mapping_status?: { total: number; unmapped: number; mapped: number };
  active_personas?: number;
}
