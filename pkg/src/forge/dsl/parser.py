"""Recursive-descent parser for pipeline definition files.

Grammar (see README for the full reference)::

    document    := "pipeline" "{" block* "}"
    block       := triggers | environment | delivery | signing | stage
    triggers    := "triggers" "{" pollscm* "}"
    pollscm     := "pollSCM" "{" (cron|repo|branch STRING)* "}"
    environment := "environment" "{" (WORD STRING)* "}"
    delivery    := "delivery" "{" delivery_key* "}"
    signing     := "signing" "{" (keystore|alias|*_password_env STRING)* "}"
    stage       := "stage" STRING "{" stage_item* "}"
    stage_item  := step | "parallel" "{" stage stage+ "}"
                 | "when_mode" WORD | "requires_signing"
    step        := ("sh"|"publish") STRING attrs?
                 | ("notify_team"|"notify_users"|"upload") attrs?
    attrs       := "{" ("timeout_seconds" WORD | "env" "{" (WORD STRING)* "}"
                 | "acceptance")* "}"

Parsing is deterministic and total: any input yields either a
:class:`~forge.dsl.model.PipelineDef` or a non-empty diagnostic list.
"""

from __future__ import annotations

from dataclasses import dataclass

from forge.dsl import lexer
from forge.dsl.lexer import EOF, LBRACE, RBRACE, STRING, WORD, Token
from forge.dsl.model import (
    COMMAND_KINDS,
    MODES,
    DeliveryConfig,
    Diagnostic,
    PipelineDef,
    SigningConfig,
    StageDef,
    StepDef,
    TriggerDef,
)

# Reserved for a future post-stage hook block; currently rejected with a
# dedicated message instead of a generic unknown-keyword error.
_RESERVED = frozenset({"post"})


@dataclass
class ParseResult:
    pipeline: PipelineDef | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.pipeline is not None


class _Abort(Exception):
    """Internal: syntax error from which we do not recover."""


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.source = source
        self.i = 0
        self.diags: list[Diagnostic] = []

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.type != EOF:
            self.i += 1
        return tok

    def error(self, message: str, tok: Token) -> None:
        self.diags.append(Diagnostic(self.source, tok.line, tok.col, message))

    def fail(self, message: str, tok: Token) -> None:
        self.error(message, tok)
        raise _Abort

    def expect(self, ttype: str, what: str) -> Token:
        tok = self.advance()
        if tok.type != ttype:
            self.fail(f"expected {what}, got {_describe(tok)}", tok)
        return tok

    def expect_word(self, value: str) -> Token:
        tok = self.advance()
        if tok.type != WORD or tok.value != value:
            self.fail(f"expected '{value}', got {_describe(tok)}", tok)
        return tok

    def expect_string(self, what: str) -> Token:
        return self.expect(STRING, what)

    def at_block_end(self) -> bool:
        return self.peek().type in (RBRACE, EOF)

    # -- grammar -----------------------------------------------------------

    def parse_document(self) -> PipelineDef:
        self.expect_word("pipeline")
        self.expect(LBRACE, "'{'")

        triggers: list[TriggerDef] | None = None
        environment: list[tuple[str, str]] | None = None
        delivery: DeliveryConfig | None = None
        signing: SigningConfig | None = None
        stages: list[StageDef] = []

        while not self.at_block_end():
            tok = self.expect(WORD, "a block keyword")
            word = tok.value
            if word == "triggers":
                if triggers is not None:
                    self.error("duplicate 'triggers' block", tok)
                triggers = self.parse_triggers()
            elif word == "environment":
                if environment is not None:
                    self.error("duplicate 'environment' block", tok)
                environment = self.parse_env_pairs()
            elif word == "delivery":
                if delivery is not None:
                    self.error("duplicate 'delivery' block", tok)
                delivery = self.parse_delivery()
            elif word == "signing":
                if signing is not None:
                    self.error("duplicate 'signing' block", tok)
                signing = self.parse_signing(tok)
            elif word == "stage":
                stages.append(self.parse_stage(depth=0))
            else:
                self.fail(f"unknown keyword '{word}' at pipeline level", tok)
        self.expect(RBRACE, "'}'")
        trailing = self.peek()
        if trailing.type != EOF:
            self.fail(
                f"unexpected content after closing '}}': {_describe(trailing)}",
                trailing,
            )

        if not stages:
            self.error("pipeline defines no stages", self.tokens[0])
        self._check_unique_stage_names(stages)

        return PipelineDef(
            stages=tuple(stages),
            triggers=tuple(triggers or ()),
            environment=tuple(environment or ()),
            delivery=delivery or DeliveryConfig(),
            signing=signing,
            source_name=self.source,
        )

    def parse_triggers(self) -> list[TriggerDef]:
        self.expect(LBRACE, "'{'")
        out: list[TriggerDef] = []
        while not self.at_block_end():
            tok = self.expect(WORD, "'pollSCM'")
            if tok.value != "pollSCM":
                self.fail(f"unknown trigger kind '{tok.value}'", tok)
            out.append(self.parse_pollscm(tok))
        self.expect(RBRACE, "'}'")
        return out

    def parse_pollscm(self, head: Token) -> TriggerDef:
        self.expect(LBRACE, "'{'")
        seen: dict[str, str] = {}
        while not self.at_block_end():
            key = self.expect(WORD, "a pollSCM key")
            if key.value not in ("cron", "repo", "branch"):
                self.fail(f"unknown pollSCM key '{key.value}'", key)
            if key.value in seen:
                self.error(f"duplicate pollSCM key '{key.value}'", key)
            seen[key.value] = self.expect_string(f"a string after '{key.value}'").value
        self.expect(RBRACE, "'}'")
        for required in ("cron", "repo"):
            if required not in seen:
                self.error(f"pollSCM trigger is missing '{required}'", head)
        return TriggerDef(
            cron_expression=seen.get("cron", ""),
            repo=seen.get("repo", ""),
            branch=seen.get("branch", "master"),
            pos=(head.line, head.col),
        )

    def parse_env_pairs(self) -> list[tuple[str, str]]:
        self.expect(LBRACE, "'{'")
        pairs: list[tuple[str, str]] = []
        names: set[str] = set()
        while not self.at_block_end():
            name = self.expect(WORD, "an environment variable name")
            value = self.expect_string(f"a string value for '{name.value}'")
            if name.value in names:
                self.error(f"duplicate environment entry '{name.value}'", name)
            names.add(name.value)
            pairs.append((name.value, value.value))
        self.expect(RBRACE, "'}'")
        return pairs

    def parse_delivery(self) -> DeliveryConfig:
        self.expect(LBRACE, "'{'")
        mode = "delivery"
        team_webhook: str | None = None
        recipients: list[str] = []
        outbox = "outbox"
        endpoint: str | None = None
        artifact = "**/*.apk"
        seen: set[str] = set()
        while not self.at_block_end():
            key = self.expect(WORD, "a delivery key")
            kv = key.value
            if kv != "recipient" and kv in seen:
                self.error(f"duplicate delivery key '{kv}'", key)
            seen.add(kv)
            if kv == "mode":
                tok = self.expect(WORD, "'delivery' or 'deployment'")
                if tok.value not in MODES:
                    self.error(
                        f"delivery mode must be one of {MODES}, got '{tok.value}'", tok
                    )
                else:
                    mode = tok.value
            elif kv == "team_webhook":
                team_webhook = self.expect_string("a webhook URL").value
            elif kv == "recipient":
                recipients.append(self.expect_string("a recipient address").value)
            elif kv == "outbox":
                outbox = self.expect_string("an outbox directory").value
            elif kv == "distribution_endpoint":
                endpoint = self.expect_string("an endpoint URL").value
            elif kv == "artifact":
                artifact = self.expect_string("an artifact glob").value
            else:
                self.fail(f"unknown delivery key '{kv}'", key)
        self.expect(RBRACE, "'}'")
        return DeliveryConfig(
            mode=mode,
            team_webhook_url=team_webhook,
            user_recipients=tuple(recipients),
            outbox_dir=outbox,
            distribution_endpoint=endpoint,
            artifact_glob=artifact,
        )

    def parse_signing(self, head: Token) -> SigningConfig:
        self.expect(LBRACE, "'{'")
        keys = ("keystore", "alias", "store_password_env", "key_password_env")
        seen: dict[str, str] = {}
        while not self.at_block_end():
            key = self.expect(WORD, "a signing key")
            if key.value not in keys:
                self.fail(f"unknown signing key '{key.value}'", key)
            if key.value in seen:
                self.error(f"duplicate signing key '{key.value}'", key)
            value = self.expect_string(f"a string after '{key.value}'")
            if key.value.endswith("_env") and not value.value:
                self.error(f"signing {key.value} must not be empty", value)
            seen[key.value] = value.value
        self.expect(RBRACE, "'}'")
        for required in keys:
            if required not in seen:
                self.error(f"signing block is missing '{required}'", head)
        if not seen.get("alias", "x"):
            self.error("signing alias must not be empty", head)
        return SigningConfig(
            keystore_path=seen.get("keystore", ""),
            key_alias=seen.get("alias", ""),
            store_password_env=seen.get("store_password_env", ""),
            key_password_env=seen.get("key_password_env", ""),
        )

    def parse_stage(self, depth: int) -> StageDef:
        name = self.expect_string("a stage name")
        if not name.value:
            self.error("stage name must not be empty", name)
        self.expect(LBRACE, "'{'")

        steps: list[StepDef] = []
        branches: list[StageDef] | None = None
        when_mode = "always"
        requires_signing = False

        while not self.at_block_end():
            tok = self.expect(WORD, "a step or stage attribute")
            word = tok.value
            if word in ("sh", "publish"):
                command = self.expect_string(f"a command string after '{word}'")
                if not command.value:
                    self.error(f"{word} step has an empty command", command)
                steps.append(self._with_attrs(word, command.value, tok))
            elif word in ("notify_team", "notify_users", "upload"):
                steps.append(self._with_attrs(word, "", tok))
            elif word == "parallel":
                if depth > 0:
                    self.error("nested parallel groups are not allowed", tok)
                if branches is not None:
                    self.error("stage has more than one parallel group", tok)
                branches = self.parse_parallel(tok, depth)
            elif word == "when_mode":
                value = self.expect(WORD, "'delivery', 'deployment' or 'always'")
                if value.value not in ("always",) + MODES:
                    self.error(
                        f"when_mode must be delivery, deployment or always, got '{value.value}'",
                        value,
                    )
                else:
                    when_mode = value.value
            elif word == "requires_signing":
                requires_signing = True
            elif word in _RESERVED:
                self.fail(f"'{word}' blocks are not supported", tok)
            else:
                self.fail(f"unknown keyword '{word}' inside stage", tok)
        self.expect(RBRACE, "'}'")

        if steps and branches is not None:
            self.error(
                f"stage '{name.value}' mixes direct steps with a parallel group", name
            )
        if not steps and branches is None:
            self.error(f"stage '{name.value}' is empty", name)

        return StageDef(
            name=name.value,
            steps=tuple(steps),
            parallel=tuple(branches or ()),
            when_mode=when_mode,
            requires_signing=requires_signing,
            pos=(name.line, name.col),
        )

    def parse_parallel(self, head: Token, depth: int) -> list[StageDef]:
        self.expect(LBRACE, "'{'")
        branches: list[StageDef] = []
        while not self.at_block_end():
            tok = self.expect_word("stage")
            branch = self.parse_stage(depth=depth + 1)
            if branch.when_mode != "always":
                self.error(
                    f"when_mode is not allowed on parallel branch '{branch.name}'", tok
                )
            branches.append(branch)
        self.expect(RBRACE, "'}'")
        if len(branches) < 2:
            self.error("parallel group needs at least two branches", head)
        return branches

    def _with_attrs(self, kind: str, command: str, head: Token) -> StepDef:
        timeout = 1800
        env: list[tuple[str, str]] = []
        acceptance = False
        if self.peek().type == LBRACE:
            self.advance()
            while not self.at_block_end():
                key = self.expect(WORD, "a step attribute")
                if key.value == "timeout_seconds":
                    value = self.expect(WORD, "an integer")
                    try:
                        timeout = int(value.value, 10)
                    except ValueError:
                        self.error(f"timeout_seconds must be an integer, got '{value.value}'", value)
                        timeout = 1800
                    if timeout <= 0:
                        self.error("timeout_seconds must be positive", value)
                        timeout = 1800
                elif key.value == "env":
                    env.extend(self.parse_env_pairs())
                elif key.value == "acceptance":
                    if kind != "sh":
                        self.error("'acceptance' applies only to sh steps", key)
                    else:
                        acceptance = True
                else:
                    self.fail(f"unknown step attribute '{key.value}'", key)
            self.expect(RBRACE, "'}'")
        return StepDef(
            kind=kind,
            command=command,
            timeout_seconds=timeout,
            env=tuple(env),
            acceptance=acceptance,
            pos=(head.line, head.col),
        )

    def _check_unique_stage_names(self, stages: list[StageDef]) -> None:
        seen: dict[str, tuple[int, int]] = {}

        def visit(stage: StageDef) -> None:
            if stage.name in seen:
                self.diags.append(
                    Diagnostic(
                        self.source,
                        stage.pos[0],
                        stage.pos[1],
                        f"duplicate stage name '{stage.name}'",
                    )
                )
            else:
                seen[stage.name] = stage.pos
            for branch in stage.parallel:
                visit(branch)

        for stage in stages:
            visit(stage)


def _describe(tok: Token) -> str:
    if tok.type == EOF:
        return "end of input"
    if tok.type == STRING:
        return f'string "{tok.value}"'
    return f"'{tok.value}'"


def parse_pipeline(text: str, source_name: str) -> ParseResult:
    """Parse a pipeline document.

    Returns a :class:`ParseResult`; ``pipeline`` is set only when there are
    no diagnostics.  Never raises on malformed input.
    """
    tokens, lex_diags = lexer.tokenize(text, source_name)
    if lex_diags:
        return ParseResult(None, lex_diags)
    parser = _Parser(tokens, source_name)
    try:
        pipeline = parser.parse_document()
    except _Abort:
        return ParseResult(None, parser.diags)
    if parser.diags:
        return ParseResult(None, parser.diags)
    return ParseResult(pipeline, [])
