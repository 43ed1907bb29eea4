int input() {
    int v;
    v = getenv("PATH"); // source:a
    return v;
}

int main() {
    int size;
    size = input();
    malloc(size); // sink:a
    return 0;
}
