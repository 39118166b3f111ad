"""Word lists backing the heuristic tagger, the chunker and the pipeline."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

PRONOUNS = frozenset(
    """
    i me myself you yourself yourselves he him himself she hers herself it itself
    we us ourselves they them themselves mine yours ours theirs one someone
    somebody anyone anybody everyone everybody nobody nothing something everything
    who whom whoever
    """.split()
)

POSSESSIVE_DETERMINERS = frozenset("my your his its our their".split())

DETERMINERS = frozenset(
    """
    the a an this that these those some any no every each either neither another
    all both several many few much such what which whose
    """.split()
)

THIRD_PERSON_PRONOUNS = frozenset(
    "he him his himself she her hers herself it its itself they them their theirs themselves".split()
)
MALE_PRONOUNS = frozenset("he him his himself".split())
FEMALE_PRONOUNS = frozenset("she her hers herself".split())

MODALS_AND_DO = frozenset(
    """
    can could will would shall should may might must do does did
    can't couldn't won't wouldn't shan't shouldn't mightn't mustn't don't doesn't didn't
    cannot
    """.split()
)

AUXILIARIES = MODALS_AND_DO | frozenset(
    """
    be am is are was were been being have has had having
    isn't aren't wasn't weren't hasn't haven't hadn't ain't
    i'm you're he's she's it's we're they're i've you've we've they've
    i'd you'd he'd she'd we'd they'd i'll you'll he'll she'll we'll they'll
    """.split()
)

NEGATIONS = frozenset("not never n't".split())

PARTICLES = frozenset("up down out off over away back on in around along through".split())

INTENSIFIERS = frozenset("so too very really quite more most less least pretty rather extremely".split())

FUNCTION_WORDS = (
    frozenset(
        """
        of in on at by for with about against between into through during before after
        above below to from up down out off over under again further then once here there
        when where why how than too very just also only not never always often sometimes
        even still yet already almost quite rather really more most less least as like
        unlike toward towards upon within without across behind beyond near onto per via
        around along away back ever perhaps maybe however therefore thus instead else
        nope yes yeah ok okay please thanks hello hi well now ago soon later together
        n't whether
        """.split()
    )
    | INTENSIFIERS
    | PARTICLES
)

ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "less", "ical", "ish")

_BASE_ADJECTIVES = """
good bad big small large little long short tall old young new heavy light weak strong
fast slow hot cold warm cool happy sad angry upset tired late early busy free full empty
rich poor easy hard difficult simple clear dark bright loud quiet high low deep wide
narrow thin thick fat lazy smart clever stupid kind nice mean rude polite brave afraid
scared sure certain able unable available ready sick ill dead alive real true false
right wrong great fine best worst better worse sorry glad proud sick angry wise
famous popular important poor fragile sturdy tiny huge short sharp dull soft rough
smooth wet dry clean dirty cheap expensive safe dangerous honest fair guilty innocent
open closed red blue green black white yellow brown gray grey pink purple orange
hungry thirsty jealous nervous curious generous successful helpful careful whole other
same different entire local public private main major minor similar special certain
steel wooden golden silent calm wild gentle fierce shy bored excited worried surprised
""".split()

ADJECTIVES = frozenset(
    _BASE_ADJECTIVES
    + [a + "er" for a in _BASE_ADJECTIVES if not a.endswith("e") and not a.endswith("y")]
    + [a + "r" for a in _BASE_ADJECTIVES if a.endswith("e")]
    + [a[:-1] + "ier" for a in _BASE_ADJECTIVES if a.endswith("y")]
    + "bigger biggest hotter thinner fatter sadder wetter".split()
)

# base form -> irregular (past, past participle); regular verbs map to None
_VERBS = """
accept add admire admit agree allow answer appear apply argue arrive ask attack avoid
bake bark believe belong blame boil borrow bother bully call calm care carry cause
change chase cheat check cheer chew clean climb close collect comfort compare
complain complete consider contain continue convince cook copy correct cough count
cover crash crawl cross cry damage dance decide defeat deliver deny depend describe
deserve destroy die disagree disappear discover dislike divide doubt drag dress drop
earn employ end enjoy enter envy escape examine excite expect explain face fail fear
fill finish fix follow force form fry gather glue grab greet guard guess hammer hand
handle happen harm hate help hire hope hug hunt hurry ignore imagine impress improve
include inform insult intend interrupt introduce invent invite irritate join joke jump
kick kill kiss knock label land last laugh learn lift like list listen live load lock
look love manage manipulate marry match matter mention miss move murder name need nod
notice obey object offer open order own paint pass pause phone pick place plan plant
play please point pour praise pray prefer prepare present pretend prevent print promise
protect provide pull punch punish push question race rain reach realize receive
recognize refuse regret reject relax release remain remember remind remove repair repeat
replace reply report request rescue respect rest retire return rob roll rub ruin rush
sail save scare scream search serve settle share shave shock shout sign smash smell
smile smoke snow sound start stay step stop struggle study succeed suffer suggest
support suppose surprise surround suspect talk taste tease thank touch tour trade train
travel treat trick trust try turn type visit vote wait walk want warn wash waste watch
wave welcome whisper wish wonder work worry wrap yell
submit hold bully goof visit apologize attack kidnap
""".split()

_IRREGULAR = {
    "be": "was were been", "begin": "began begun", "bite": "bit bitten", "blow": "blew blown",
    "break": "broke broken", "bring": "brought", "build": "built", "buy": "bought",
    "catch": "caught", "choose": "chose chosen", "come": "came", "cut": "cut",
    "dig": "dug", "draw": "drew drawn", "drink": "drank drunk", "drive": "drove driven",
    "eat": "ate eaten", "fall": "fell fallen", "feed": "fed", "feel": "felt",
    "fight": "fought", "find": "found", "fit": "fit", "fly": "flew flown", "forget": "forgot forgotten",
    "forgive": "forgave forgiven", "freeze": "froze frozen", "get": "got gotten",
    "give": "gave given", "go": "went gone", "grow": "grew grown", "hang": "hung",
    "hear": "heard", "hide": "hid hidden", "hit": "hit", "hurt": "hurt", "keep": "kept",
    "know": "knew known", "lay": "laid", "lead": "led", "leave": "left", "lend": "lent",
    "let": "let", "lie": "lay lain", "lose": "lost", "make": "made", "meet": "met",
    "pay": "paid", "put": "put", "quit": "quit", "read": "read", "ride": "rode ridden",
    "ring": "rang rung", "rise": "rose risen", "run": "ran", "say": "said", "see": "saw seen",
    "sell": "sold", "send": "sent", "set": "set", "shake": "shook shaken", "shoot": "shot",
    "show": "showed shown", "shut": "shut", "sing": "sang sung", "sit": "sat", "sleep": "slept",
    "speak": "spoke spoken", "spend": "spent", "stand": "stood", "steal": "stole stolen",
    "stick": "stuck", "sting": "stung", "strike": "struck", "swim": "swam swum",
    "take": "took taken", "teach": "taught", "tear": "tore torn", "tell": "told",
    "think": "thought", "throw": "threw thrown", "understand": "understood",
    "wake": "woke woken", "wear": "wore worn", "win": "won", "write": "wrote written",
    "have": "had", "do": "did done", "beat": "beat beaten", "bend": "bent", "bet": "bet",
    "bleed": "bled", "burn": "burnt", "deal": "dealt", "dream": "dreamt", "hold": "held",
    "mean": "meant", "seek": "sought", "shine": "shone", "slide": "slid", "spin": "spun",
    "split": "split", "spread": "spread", "swing": "swung", "weep": "wept", "wind": "wound",
    "become": "became", "overcome": "overcame", "undertake": "undertook undertaken",
}


def _inflect(base: str) -> set[str]:
    forms = {base}
    if base.endswith("e"):
        forms |= {base + "s", base + "d", base[:-1] + "ing"}
    elif base.endswith("y") and base[-2:-1] not in "aeiou":
        forms |= {base[:-1] + "ies", base[:-1] + "ied", base + "ing"}
    else:
        suffix_s = "es" if base.endswith(("s", "sh", "ch", "x", "z", "o")) else "s"
        forms |= {base + suffix_s, base + "ed", base + "ing"}
        # consonant doubling for short CVC stems (stop -> stopped)
        if len(base) >= 3 and base[-1] not in "aeiouwxy" and base[-2] in "aeiou" and base[-3] not in "aeiou":
            forms |= {base + base[-1] + "ed", base + base[-1] + "ing"}
    return forms


def _verb_forms() -> frozenset[str]:
    out: set[str] = set()
    for v in _VERBS:
        out |= _inflect(v)
    for base, irregular in _IRREGULAR.items():
        out |= _inflect(base)
        out |= set(irregular.split())
    return frozenset(out)


VERB_FORMS = _verb_forms()

_DATA = resources.files("wscoverlap") / "data"


def read_wordlist(path: str | Path | None, default: str) -> list[str]:
    """One entry per line; blank lines and ``#`` comments ignored."""
    if path is None:
        text = (_DATA / default).read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def load_connectives(path: str | Path | None = None) -> frozenset[str]:
    return frozenset(w.lower() for w in read_wordlist(path, "connectives.txt"))


@lru_cache(maxsize=None)
def given_names() -> frozenset[str]:
    return frozenset(read_wordlist(None, "names_male.txt") + read_wordlist(None, "names_female.txt"))


CONNECTIVES = load_connectives()

# words that cannot start a noun phrase; used to disambiguate "her"
NON_NOMINAL = FUNCTION_WORDS | CONNECTIVES | PRONOUNS | DETERMINERS | AUXILIARIES
