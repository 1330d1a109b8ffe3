/** Stale-response suppression: only the latest request may update a screen. */

export class RequestSequencer {
  private current = 0;

  /** Returns an acceptor that is true only while this request is the newest. */
  begin(): () => boolean {
    const ticket = ++this.current;
    return () => ticket === this.current;
  }
}
