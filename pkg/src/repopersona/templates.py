"""Prompt template texts for every pipeline stage.

The template strings are load-bearing: structured-output parsing and the
golden-file tests both assume this exact wording, so edits here must be
deliberate. Placeholders are the bracketed markers; rendering replaces them
and changes nothing else.
"""

from __future__ import annotations

STAGES = (
    "link_discovery",
    "user_insights",
    "domain_analysis",
    "persona_generation",
    "headshot",
    "merge",
    "issue_mapping",
)

LINK_DISCOVERY_SYSTEM = (
    "You are an expert at analyzing documentation to understand software end users."
)

LINK_DISCOVERY_USER = """\
Analyze this README for [owner/repo] and identify links that would help understand the END USERS of this software (not developers/contributors).

README Content: [README text]

For each link found, determine:
1. Is it internal (relative path in repo) or external?
2. What type of end-user information might it contain?
3. How valuable is it for understanding user needs, behaviors, and use cases?

Think about:
- WHO are the end users? (their roles, backgrounds, needs)
- WHAT do they use this software for?
- HOW do they learn and get support?
- WHERE do they discuss their experiences?

Be smart about identifying:
- Product homepages often have user testimonials and use cases
- Documentation sites reveal user workflows
- Forums/communities show user problems and needs
- Feature pages explain what users value
- Tutorial sites show learning patterns

Exclude developer-focused resources unless they contain user stories. Focus on quality over quantity - prefer 3-5 highly relevant links over many marginal ones.

Return JSON in the format below:
{"internal_links": [{"path": "relative/path/to/file",
   "expected_content": "what we might find there",
   "user_relevance": "why this helps understand users",
   "priority": 1-5}],
 "external_links": [{"url": "https://...",
   "expected_content": "what we might find there",
   "user_relevance": "why this helps understand users",
   "priority": 1-5}],
 "reasoning": "explanation of choices and what was excluded"}"""

USER_INSIGHTS_SYSTEM = "Extract end-user insights for persona creation."

USER_INSIGHTS_USER = """\
Analyze all this content about [owner/repo] and extract insights about END USERS:
[Resource Corpus content with internal and external documentation]

Provide a comprehensive summary of:
1. User Types: Who uses this software? (roles, backgrounds, skill levels)
2. Use Cases: What do they use it for? (specific tasks, workflows)
3. User Needs: What problems does it solve for them?
4. Pain Points: What challenges do users face?
5. Community: How do users get support and connect?

Return JSON in the format below:
{"user_types": ["list of identified user types with descriptions"],
 "primary_use_cases": ["main ways users interact with the software"],
 "user_needs": ["problems it solves, value it provides"],
 "pain_points": ["challenges or frustrations users experience"],
 "community_insights": "how users learn and get support",
 "persona_recommendations": ["suggested personas based on findings"]}"""

DOMAIN_ANALYSIS_SYSTEM = """\
You are a domain analyst specializing in extracting user-centric insights from technical documentation. Your goal is to uncover the human context behind the technology - who uses it, why they need it, and what challenges they face.

Focus on identifying:
1. Specific product features and capabilities that users interact with
2. Common workflows and use cases
3. Integration points with other tools
4. Performance or usability constraints
5. Target user segments and their distinct needs"""

DOMAIN_ANALYSIS_USER = """\
Analyze the following repository content to extract domain insights for persona generation:
Repository Content: [README and additional context]

Extract the following information:

1. Domain Summary (What & Why):
   - What is this product/tool/service?
   - What real-world problem does it solve?
   - What is the primary use case and context?

2. Key Features (How):
   - List the SPECIFIC features and capabilities users interact with
   - For each feature, explain the user workflow and use case
   - Note performance characteristics (speed, efficiency, limitations)
   - Identify integration capabilities with other tools

3. User Evidence (Who):
   - Extract any mentions of user types, roles, or segments
   - Identify different ways people might use this product

4. Behavioral Insights:
   - What tasks are users trying to accomplish?
   - What friction points or challenges are mentioned?
   - What motivates users to adopt this solution?

Focus on concrete evidence over assumptions.

Return JSON in the format below:
{"domain_summary": "Clear description of what this is and why it matters",
 "key_features": [{"name": "Feature Name",
   "description": "What it does, how users interact, what workflow it enables"}],
 "user_characteristics": [{"trait": "Observed characteristic",
   "context": "Evidence or reasoning for this trait"}],
 "additional_insights": ["Behavioral insight or pattern observed"]}"""

PERSONA_GENERATION_SYSTEM = """\
You are a user research expert who creates evidence-based personas that avoid stereotypes and capture real user diversity. Your personas must be:
1. Grounded in domain analysis data and SPECIFIC to the product
2. Diverse in demographics, backgrounds, and perspectives
3. Focused on behaviors and needs, not demographics
4. Free from bias and stereotypes
5. Useful for product decisions with clear feature connections

CRITICAL: Every goal and pain point MUST directly relate to using THIS SPECIFIC product/tool, not generic professional challenges."""

PERSONA_GENERATION_USER = """\
Based on this domain analysis, create [N] distinct user personas:
Domain Analysis: [JSON domain analysis]

CRITICAL CONTEXT - Generate personas representing the FULL spectrum:
- Technical users (developers, DevOps, data engineers)
- Business users (managers, analysts, coordinators)
- Customer-facing users (support, sales, consultants)
- External users (clients, partners, community members)

PERSONA REQUIREMENTS:
1. True Diversity - Go beyond job titles. Consider:
   - Usage Context: Internal tool vs. customer-facing vs. embedded
   - Interaction Mode: GUI users vs. API users vs. both
   - Frequency: Daily power users vs. occasional vs. one-time setup
   - Technical Spectrum: No-code -> Low-code -> Full developers
   - Geographic & Cultural: Global representation
   - Company Size: Freelancers -> Startups -> Enterprises -> Government
   - Feature Focus: Different personas care about different aspects

2. Feature Coverage - Ensure personas collectively cover ALL features:
   - Core functionality (main workflows)
   - Advanced features (power user capabilities)
   - Integration features (connections to other tools)
   - Collaboration features (sharing, permissions)
   - API/Developer features (SDKs, webhooks, extensions)
   - Admin features (user management, security, compliance)

3. Realistic Goals & Pain Points:
GOALS - Mix different types:
a) Feature-Specific: "Reduce API integration time from 2 days to 2 hours"
b) Workflow/Process: "Streamline onboarding by embedding chat widget"
c) Business Outcome: "Decrease support ticket volume by 40%"

PAIN POINTS - Include various friction types:
a) Missing Features: "Can't share clickable links in embedded chat"
b) Poor UX/Workflow: "Setting up integrations requires 15+ clicks"
c) Technical Limitations: "API rate limits prevent real-time sync"
d) Business Impact: "Lack of audit logs makes compliance slow"

4. Confidence Scoring (0.0-1.0):
   - High (0.8-1.0): Strong evidence in domain analysis
   - Medium (0.6-0.79): Reasonable assumptions
   - Low (0.4-0.59): Speculative but plausible

Return JSON in the format below:
{"personas": [{"name": "Realistic name", "age": 25-65,
 "occupation": "Specific role and company type",
 "location": "City, Country (diverse locations)",
 "quote": "Something they would say about their work/challenges",
 "tagline": "One-line summary of their relationship to domain",
 "background": "2-3 sentences: How they got here, work context",
 "personality_traits": ["Work style", "Learning preference"],
 "goals": ["Mix of technical, workflow, and business goals"],
 "pain_points": ["Mix of features, UX issues, limitations"],
 "technical_skills": ["Relevant skills", "Tools they use"],
 "experience_level": "beginner | intermediate | advanced | expert",
 "confidence_score": 0.0-1.0}]}"""

HEADSHOT_TEMPLATES = (
    "Natural portrait of [gender hint], [age] years old, works as [occupation]. "
    "[expression] expression. Wearing [clothing style]. [setting]. [photography style]. "
    "Authentic, genuine moment. High quality photography.",
    "Candid photo of [gender hint] in their element. [age]-year-old. [occupation]. "
    "[expression] while working. [clothing style]. [setting]. Natural lighting, "
    "[photography style]. Real person, authentic moment.",
    "Environmental portrait: [gender hint], [age] years old, [occupation]. "
    "Natural [expression] expression. [clothing style]. Photographed in [setting]. "
    "[photography style], documentary style.",
)

MERGE_SYSTEM = (
    "You are a persona synthesis expert. Create a coherent, unified persona from "
    "multiple sources. Focus on what these users share, not their differences."
)

MERGE_PERSONAS_PLACEHOLDER = """\
[Detailed persona descriptions including name, age, occupation, location,
quote, tagline, background, personality traits, goals, pain points,
technical skills, experience level, and tags for each persona]"""

MERGE_USER = (
    """\
Merge these [N] personas into a unified persona:
"""
    + MERGE_PERSONAS_PLACEHOLDER
    + """

Create a NEW unified persona that:
1. Represents the common ground between all source personas
2. Has a coherent narrative explaining their background
3. Synthesizes goals and pain points meaningfully
4. Feels like a real person, not a list of averaged traits
5. Highlights what unites these user segments

The merged persona should help teams understand what these users have in common.

Return JSON in the format below:
{"name": "New name reflecting the unified segment", "age": 30-50,
 "occupation": "Role that encompasses the pattern",
 "location": "Appropriate location or 'Various'",
 "quote": "What unites their perspective",
 "tagline": "Their shared relationship to the domain",
 "background": "Narrative explaining their common journey",
 "personality_traits": ["Shared trait 1", "Trait 2", "Trait 3"],
 "goals": ["Common goal 1", "Goal 2", "Goal 3"],
 "pain_points": ["Shared pain 1", "Pain 2", "Pain 3"],
 "technical_skills": ["Common skill 1", "Skill 2"],
 "experience_level": "intermediate|advanced",
 "tags": ["unified-segment", "tag2", "tag3"]}"""
)

ISSUE_MAPPING_SYSTEM = (
    "Match issues to personas based on SPECIFIC documented goals, pain points, and "
    "use cases. Every match must quote exact text from the persona's profile that "
    "relates to the issue."
)

ISSUE_MAPPING_USER = """\
Match this GitHub issue to relevant personas:
Issue: [Title, Body, Labels]
Available Personas: [JSON personas]

PHASE 1: ISSUE DECOMPOSITION

A. Surface Analysis
   - What is explicitly stated in the issue?
   - What technical components/features are mentioned?
   - What error messages or symptoms are described?

B. Deep Analysis
   - What is the USER trying to accomplish (not just fix)?
   - What workflow is interrupted?
   - What's the hidden frustration behind the technical description?
   - If this were fixed, what would the user do next?

C. Issue DNA Profile - Who would write this issue:
   - Language complexity: Simple/Technical/Expert
   - Emotional tone: Frustrated/Neutral/Constructive
   - Detail level: Minimal/Adequate/Comprehensive

PHASE 2: REVERSE MATCHING - For each persona, ask:
1. "Would THIS persona write THIS issue in THIS way?"
2. "What language would they use differently?"
3. "What details would they include/omit?"
4. "How urgent would this be for them specifically?"

Red flags for false matches:
- Persona's vocabulary doesn't match issue language
- Issue complexity exceeds persona's technical level
- Persona has workarounds the issue author clearly doesn't

PHASE 3: EVIDENCE-BASED SCORING (0-100 points)

Direct Evidence (40 pts max):
   - Goal explicitly mentions affected feature: +20
   - Pain point directly describes this problem: +20

Behavioral Evidence (30 pts max):
   - Would encounter this in primary workflow: +15
   - Issue blocks a documented goal: +15

Contextual Evidence (30 pts max):
   - Technical level matches issue complexity: +10
   - Persona's context explains issue urgency: +10
   - Language/tone alignment: +10

DEDUCTIONS:
   - Persona has easy workaround: -20
   - Technical mismatch: -30
   - Would rarely use affected feature: -40

PHASE 4: ANTI-PATTERN CHECK - Reject matches showing:
1. Keyword Matching: "Both mention 'performance'" without behavioral link
2. Role Assumption: "They're a developer, this is code" without alignment
3. Sympathy Matching: "They'd care about users" without direct impact
4. Broad Benefit: "Everyone wants things to work" without specific need
5. Adjacent Feature: Persona uses X, issue affects Y nearby

VALIDATION QUESTIONS before finalizing:
1. Would the matched persona say "Yes, this affects me!"?
2. Would they prioritize fixing this in their top 5 issues?
3. Does the match make sense to someone who knows the product?

FINAL MANDATE:
- Zero tolerance for generic matching
- Every match must survive: "Would this persona lose sleep over this?"
- When in doubt, NO MATCH is better than wrong match

Return JSON in the format below:
{"matched_persona_ids": [1, 3], "primary_persona_id": 1,
 "confidence": 0.0-1.0, "reasoning": "Overall rationale for matches",
 "persona_rationales": {"1": {"relevance_score": 0.0-1.0,
   "matched_goals": ["Specific goal addressed"],
   "matched_pain_points": ["Specific pain point addressed"],
   "use_case_fit": "How they would encounter this issue",
   "impact_level": "high|medium|low",
   "rationale": "Quote SPECIFIC goal/pain point from persona"}},
 "analysis_notes": {"issue_type": "bug|feature|enhancement",
   "technical_level": "beginner|intermediate|advanced",
   "urgency_indicators": ["Signs of urgency"]}}"""

# Placeholder markers each stage's renderer substitutes, keyed by the logical
# context-key name used throughout the pipeline.
STAGE_PLACEHOLDERS: dict[str, dict[str, str]] = {
    "link_discovery": {
        "owner_repo": "[owner/repo]",
        "readme_text": "[README text]",
    },
    "user_insights": {
        "owner_repo": "[owner/repo]",
        "corpus_text": "[Resource Corpus content with internal and external documentation]",
    },
    "domain_analysis": {
        "repository_content": "[README and additional context]",
    },
    "persona_generation": {
        "persona_count": "[N]",
        "domain_analysis_json": "[JSON domain analysis]",
    },
    "headshot": {
        "gender_hint": "[gender hint]",
        "age": "[age]",
        "occupation": "[occupation]",
        "expression": "[expression]",
        "clothing_style": "[clothing style]",
        "setting": "[setting]",
        "photography_style": "[photography style]",
    },
    "merge": {
        "persona_count": "[N]",
        "persona_descriptions": MERGE_PERSONAS_PLACEHOLDER,
    },
    "issue_mapping": {
        "issue_block": "[Title, Body, Labels]",
        "personas_json": "[JSON personas]",
    },
}

STAGE_TEXTS: dict[str, tuple[str, str]] = {
    "link_discovery": (LINK_DISCOVERY_SYSTEM, LINK_DISCOVERY_USER),
    "user_insights": (USER_INSIGHTS_SYSTEM, USER_INSIGHTS_USER),
    "domain_analysis": (DOMAIN_ANALYSIS_SYSTEM, DOMAIN_ANALYSIS_USER),
    "persona_generation": (PERSONA_GENERATION_SYSTEM, PERSONA_GENERATION_USER),
    # headshot user text depends on the selected template; see prompts.render_prompt
    "headshot": ("", HEADSHOT_TEMPLATES[0]),
    "merge": (MERGE_SYSTEM, MERGE_USER),
    "issue_mapping": (ISSUE_MAPPING_SYSTEM, ISSUE_MAPPING_USER),
}
