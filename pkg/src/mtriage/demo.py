"""Deterministic synthetic en->es demo corpus with planted structure.

Generates training pairs, usage logs, embeddings, and 2D coordinates so the
whole pipeline runs self-contained: topical blobs (some present only in the
logs, so they score as unfamiliar), a spread of translation corruptions for
the chrF distribution, and guaranteed pass/fail examples for every built-in
rule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import write_embedding_file

# (key, train_weight, log_weight, [(en, es), ...]); {w} slots filled from vocab
_TOPICS = [
    ("food", 3, 2, [
        ("I ate {w} for breakfast today.", "Hoy comí {w} en el desayuno."),
        ("Can you cook {w} for dinner?", "¿Puedes cocinar {w} para la cena?"),
        ("This restaurant serves great {w}.", "Este restaurante sirve muy buen {w}."),
        ("We need to buy {w} at the market.", "Necesitamos comprar {w} en el mercado."),
        ("My favorite dish is {w} with rice.", "Mi plato favorito es {w} con arroz."),
    ], [("eggs", "huevos"), ("soup", "sopa"), ("chicken", "pollo"), ("bread", "pan"),
        ("cheese", "queso"), ("fish", "pescado")]),
    ("travel", 3, 2, [
        ("Where is the {w} station?", "¿Dónde está la estación de {w}?"),
        ("Our flight to {w} leaves at noon.", "Nuestro vuelo a {w} sale al mediodía."),
        ("I booked a hotel near the {w}.", "Reservé un hotel cerca de la {w}."),
        ("The {w} tour starts tomorrow morning.", "El recorrido de {w} comienza mañana por la mañana."),
        ("How far is the {w} from here?", "¿Qué tan lejos está la {w} de aquí?"),
    ], [("train", "tren"), ("bus", "autobús"), ("museum", "museo"), ("beach", "playa"),
        ("airport", "aeropuerto"), ("plaza", "plaza")]),
    ("work", 3, 2, [
        ("The {w} meeting is on Monday.", "La reunión de {w} es el lunes."),
        ("Please send the {w} report by email.", "Por favor envía el informe de {w} por correo."),
        ("Our team finished the {w} project.", "Nuestro equipo terminó el proyecto de {w}."),
        ("The manager approved the {w} budget.", "El gerente aprobó el presupuesto de {w}."),
        ("I will review the {w} contract.", "Voy a revisar el contrato de {w}."),
    ], [("sales", "ventas"), ("design", "diseño"), ("marketing", "mercadeo"),
        ("finance", "finanzas"), ("hiring", "contratación"), ("planning", "planificación")]),
    ("weather", 2, 1, [
        ("It will be {w} tomorrow afternoon.", "Mañana por la tarde estará {w}."),
        ("The forecast says {w} all week.", "El pronóstico dice {w} toda la semana."),
        ("Bring a jacket, it is {w} outside.", "Trae una chaqueta, está {w} afuera."),
        ("Last winter was very {w} here.", "El invierno pasado fue muy {w} aquí."),
    ], [("rainy", "lluvioso"), ("sunny", "soleado"), ("cold", "frío"), ("windy", "ventoso"),
        ("cloudy", "nublado"), ("warm", "cálido")]),
    ("school", 2, 1, [
        ("The {w} exam is next Friday.", "El examen de {w} es el próximo viernes."),
        ("My daughter studies {w} at university.", "Mi hija estudia {w} en la universidad."),
        ("The {w} homework was difficult.", "La tarea de {w} fue difícil."),
        ("Our {w} teacher explained the lesson.", "Nuestro maestro de {w} explicó la lección."),
    ], [("history", "historia"), ("biology", "biología"), ("math", "matemáticas"),
        ("chemistry", "química"), ("literature", "literatura"), ("physics", "física")]),
    ("shopping", 2, 1, [
        ("How much does this {w} cost?", "¿Cuánto cuesta este {w}?"),
        ("I want to return the {w} I bought.", "Quiero devolver el {w} que compré."),
        ("The store has a discount on {w}.", "La tienda tiene un descuento en {w}."),
        ("Do you have this {w} in blue?", "¿Tienen este {w} en azul?"),
    ], [("jacket", "abrigo"), ("phone", "teléfono"), ("watch", "reloj"), ("backpack", "mochila"),
        ("lamp", "lámpara"), ("sofa", "sofá")]),
    ("family", 2, 1, [
        ("My {w} visits us every weekend.", "Mi {w} nos visita cada fin de semana."),
        ("Our {w} birthday party is on Sunday.", "La fiesta de cumpleaños de mi {w} es el domingo."),
        ("I called my {w} this morning.", "Llamé a mi {w} esta mañana."),
        ("Her {w} lives in another city.", "Su {w} vive en otra ciudad."),
    ], [("grandmother", "abuela"), ("cousin", "primo"), ("uncle", "tío"), ("sister", "hermana"),
        ("nephew", "sobrino"), ("brother", "hermano")]),
    ("sports", 2, 1, [
        ("Our {w} team won the match!", "¡Nuestro equipo de {w} ganó el partido!"),
        ("I play {w} every Saturday morning.", "Juego {w} todos los sábados por la mañana."),
        ("The {w} final was very exciting.", "La final de {w} fue muy emocionante."),
        ("He trains {w} at the club.", "Él entrena {w} en el club."),
    ], [("soccer", "fútbol"), ("tennis", "tenis"), ("basketball", "baloncesto"),
        ("swimming", "natación"), ("volleyball", "voleibol"), ("cycling", "ciclismo")]),
    ("music", 2, 1, [
        ("She plays the {w} beautifully.", "Ella toca el {w} maravillosamente."),
        ("The {w} concert sold out quickly.", "El concierto de {w} se agotó rápidamente."),
        ("I am learning a new {w} song.", "Estoy aprendiendo una nueva canción de {w}."),
        ("Turn up the {w} music, please.", "Sube la música de {w}, por favor."),
    ], [("guitar", "guitarra"), ("piano", "piano"), ("violin", "violín"), ("jazz", "jazz"),
        ("rock", "rock"), ("salsa", "salsa")]),
    ("movies", 2, 1, [
        ("The new {w} movie opens tonight.", "La nueva película de {w} se estrena esta noche."),
        ("We watched a {w} film yesterday.", "Vimos una película de {w} ayer."),
        ("That {w} actor is very famous.", "Ese actor de {w} es muy famoso."),
        ("The {w} series has ten episodes.", "La serie de {w} tiene diez episodios."),
    ], [("horror", "terror"), ("comedy", "comedia"), ("action", "acción"), ("drama", "drama"),
        ("mystery", "misterio"), ("animation", "animación")]),
    # Log-only topics: unfamiliar to the training distribution.
    ("health", 0, 3, [
        ("I have a {w} and a high fever.", "Tengo {w} y fiebre alta."),
        ("The fever started after the {w}.", "La fiebre comenzó después de {w}."),
        ("My doctor prescribed pills for the {w}.", "Mi médico recetó pastillas para {w}."),
        ("The {w} pain is getting worse.", "El dolor de {w} está empeorando."),
        ("Does the clinic treat {w} symptoms?", "¿La clínica trata síntomas de {w}?"),
    ], [("headache", "dolor de cabeza"), ("cough", "tos"), ("migraine", "migraña"),
        ("stomachache", "dolor de estómago"), ("allergy", "alergia"), ("flu", "gripe")]),
    ("casual", 0, 3, [
        ("haha you are so funny {w}", "jaja eres tan gracioso {w}"),
        ("lol did you see that {w}", "jaja viste eso {w}"),
        ("omg that {w} was crazy haha", "dios mío ese {w} fue una locura jaja"),
        ("hey {w} wanna hang out later", "oye {w} quieres salir más tarde"),
    ], [("dude", "amigo"), ("bro", "hermano"), ("girl", "chica"), ("buddy", "compa"),
        ("meme", "meme"), ("video", "video")]),
    ("gaming", 0, 2, [
        ("My {w} build wins every raid.", "Mi configuración de {w} gana cada incursión."),
        ("The {w} boss dropped rare loot.", "El jefe de {w} soltó botín raro."),
        ("Join my {w} guild tonight.", "Únete a mi clan de {w} esta noche."),
        ("I ranked up in {w} last night.", "Subí de rango en {w} anoche."),
    ], [("mage", "mago"), ("sniper", "francotirador"), ("dungeon", "mazmorra"),
        ("arcade", "arcade"), ("puzzle", "rompecabezas"), ("racing", "carreras")]),
    ("crypto", 0, 2, [
        ("Send the {w} tokens to my wallet.", "Envía los tokens de {w} a mi billetera."),
        ("The {w} exchange froze my account.", "La plataforma de {w} congeló mi cuenta."),
        ("Claim free {w} coins now.", "Reclama monedas de {w} gratis ahora."),
        ("The {w} airdrop ends tomorrow.", "El airdrop de {w} termina mañana."),
    ], [("bitcoin", "bitcoin"), ("ether", "ether"), ("wallet", "billetera"),
        ("token", "token"), ("mining", "minería"), ("staking", "staking")]),
]

_TRAIN_SOURCES = ("tatoeba", "subtitles", "news-commentary")
_LOG_SOURCES = ("chat-app", "browser-ext", "mail-client")

_RULE_INJECTIONS = ("emoji", "url", "number", "roman-numeral", "question",
                    "exclamation", "ovs", "comma", "period")


@dataclass
class DemoPaths:
    train_file: Path
    log_file: Path
    embedding_file: Path
    coords_file: Path
    config_file: Path


def _corrupt(text: str, rng: np.random.Generator) -> str:
    """Degrade a translation to spread the chrF distribution."""
    words = text.split()
    for _ in range(int(rng.integers(1, 4))):
        op = int(rng.integers(0, 4))
        if op == 0 and len(words) > 2:
            del words[int(rng.integers(0, len(words)))]
        elif op == 1 and len(words) > 2:
            i = int(rng.integers(0, len(words) - 1))
            words[i], words[i + 1] = words[i + 1], words[i]
        elif op == 2 and words:
            i = int(rng.integers(0, len(words)))
            words[i] = words[i][: max(1, len(words[i]) // 2)]
        elif words:
            i = int(rng.integers(0, len(words)))
            words.insert(i, words[i])
    return " ".join(words)


def _inject_rule_case(rule: str, src: str, ref: str, fail: bool) -> tuple[str, str, str]:
    """Append or reshape a pair so it exercises one rule; returns src, ref, trans."""
    if rule == "emoji":
        src, ref = src + " 🙂", ref + " 🙂"
        return src, ref, (ref.replace(" 🙂", "") if fail else ref)
    if rule == "url":
        url = "https://help.example.com/es"
        src, ref = f"{src} See {url}", f"{ref} Ver {url}"
        return src, ref, (ref.replace(url, "el sitio") if fail else ref)
    if rule == "number":
        src, ref = f"{src} Room 12.", f"{ref} Sala 12."
        return src, ref, (ref.replace("12", "21") if fail else ref)
    if rule == "roman-numeral":
        src, ref = f"{src} See Chapter IV.", f"{ref} Ver Capítulo IV."
        return src, ref, (ref.replace("IV", "4") if fail else ref)
    if rule == "question":
        src, ref = "Where is the main library?", "¿Dónde está la biblioteca principal?"
        return src, ref, (ref.replace("¿", "") if fail else ref)
    if rule == "exclamation":
        src, ref = "That concert was amazing!", "¡Ese concierto fue increíble!"
        return src, ref, (ref.replace("¡", "") if fail else ref)
    if rule == "ovs":
        return src, ref, (ref + " maldito") if fail else ref
    if rule == "comma":
        src, ref = f"{src} Bring bread, milk, cheese.", f"{ref} Trae pan, leche, queso."
        return src, ref, (ref.replace(", queso", " queso") if fail else ref)
    if rule == "period":
        base = ref if ref.endswith(".") else ref + "."
        src = src if src.endswith(".") else src + "."
        return src, base, (base[:-1] if fail else base)
    raise ValueError(f"unknown rule injection {rule!r}")


def generate_demo(
    out_dir,
    n_train: int = 5000,
    n_log: int = 5000,
    dim: int = 32,
    seed: int = 7,
    binary_embeddings: bool = True,
) -> DemoPaths:
    """Write demo inputs plus a ready-to-run pipeline config; deterministic."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n_topics = len(_TOPICS)

    centers = rng.normal(size=(n_topics, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    ring = np.array(
        [[10.0 * math.cos(2 * math.pi * t / n_topics),
          10.0 * math.sin(2 * math.pi * t / n_topics)] for t in range(n_topics)]
    )

    train_weights = np.array([t[1] for t in _TOPICS], dtype=float)
    log_weights = np.array([t[2] for t in _TOPICS], dtype=float)
    train_weights /= train_weights.sum()
    log_weights /= log_weights.sum()

    def make_sentence(topic_idx: int) -> tuple[str, str]:
        _, _, _, templates, vocab = _TOPICS[topic_idx]
        ti = int(rng.integers(0, len(templates)))
        vi = int(rng.integers(0, len(vocab)))
        en_t, es_t = templates[ti]
        en_w, es_w = vocab[vi]
        return en_t.format(w=en_w), es_t.format(w=es_w)

    records = []  # (id, origin, topic, src, ref, trans)
    forced = [(rule, k < 8) for rule in _RULE_INJECTIONS for k in range(16)]
    counter = {"train": 0, "log": 0}

    def emit(origin: str, topic_idx: int):
        idx = counter[origin]
        counter[origin] += 1
        rec_id = f"t-{idx:05d}" if origin == "train" else f"l-{idx:05d}"
        src, ref = make_sentence(topic_idx)
        if forced:
            rule, fail = forced.pop()
            src, ref, trans = _inject_rule_case(rule, src, ref, fail)
        elif rng.random() < 0.08:
            rule = _RULE_INJECTIONS[int(rng.integers(0, len(_RULE_INJECTIONS)))]
            src, ref, trans = _inject_rule_case(rule, src, ref, fail=bool(rng.random() < 0.5))
        elif rng.random() < 0.40:
            trans = _corrupt(ref, rng)
        else:
            trans = ref
        records.append((rec_id, origin, topic_idx, src, ref, trans))

    for _ in range(n_train):
        emit("train", int(rng.choice(n_topics, p=train_weights)))
    for _ in range(n_log):
        emit("log", int(rng.choice(n_topics, p=log_weights)))

    start = np.datetime64("2021-07-01T00:00:00")
    horizon = 274 * 24 * 3600  # through 2022-03-31

    paths = DemoPaths(
        train_file=out / "train.jsonl",
        log_file=out / "log.jsonl",
        embedding_file=out / ("embeddings.aemb" if binary_embeddings else "embeddings.jsonl"),
        coords_file=out / "coords.jsonl",
        config_file=out / "config.json",
    )

    vectors: dict[str, np.ndarray] = {}
    with open(paths.train_file, "w", encoding="utf-8") as trainf, \
         open(paths.log_file, "w", encoding="utf-8") as logf, \
         open(paths.coords_file, "w", encoding="utf-8") as coordsf:
        for rec_id, origin, topic_idx, src, ref, trans in records:
            vec = centers[topic_idx] + rng.normal(scale=0.3 / math.sqrt(dim), size=dim)
            vectors[rec_id] = (vec / np.linalg.norm(vec)).astype(np.float32)
            xy = ring[topic_idx] + rng.normal(scale=0.4, size=2)
            coordsf.write(json.dumps(
                {"id": rec_id, "x": float(xy[0]), "y": float(xy[1])}) + "\n")
            if origin == "train":
                row = {"id": rec_id, "source": src, "translation": trans,
                       "reference": ref, "provenance": _TRAIN_SOURCES[topic_idx % 3]}
                trainf.write(json.dumps(row, ensure_ascii=False) + "\n")
            else:
                ts = start + np.timedelta64(int(rng.integers(0, horizon)), "s")
                row = {"id": rec_id, "source": src, "translation": trans,
                       "timestamp": str(ts) + "Z", "provenance": _LOG_SOURCES[topic_idx % 3]}
                logf.write(json.dumps(row, ensure_ascii=False) + "\n")

    write_embedding_file(paths.embedding_file, vectors, binary=binary_embeddings)

    config = {
        "train_file": str(paths.train_file),
        "log_file": str(paths.log_file),
        "embedding_file": str(paths.embedding_file),
        "coords_file": str(paths.coords_file),
        "language_pair": ["en", "es"],
        "normalize_embeddings": True,
        "seed": seed,
        "chrf": {"max_order": 6, "beta": 2.0, "remove_whitespace": True},
        "kde": {"grid_density": 200, "acceleration": "exact-sum", "rel_tolerance": 1e-6},
        "topics": {
            "sample_size": 2500,
            "top_k_topics": 12,
            "min_cluster_size": 25,
            "cluster_radius": 0.5,
            "keyword_count": 10,
        },
        "expansion": {"seeds_per_topic": 15, "radius": 0.6},
    }
    with open(paths.config_file, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
