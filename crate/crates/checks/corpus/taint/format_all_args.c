int main() {
    char fmt[32];
    char msg[64];
    int user;
    user = getenv("USER"); // source:a
    sprintf(msg, fmt, user); // sink:a
    return 0;
}
